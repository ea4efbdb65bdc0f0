#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polarpref/lexicons.hpp"

namespace polarpref {

/// Token-level prefix tree over responses. Nodes live in one vector; index 0
/// is the root, whose payload is empty. Before folding every payload holds
/// one token; after folding a payload may hold a span of several.
class ResponseTrie {
 public:
  struct Node {
    std::vector<std::string> payload;
    std::map<std::string, std::size_t> children;  ///< first payload token -> node index
    std::size_t terminal_count = 0;
  };

  ResponseTrie();

  /// Inserts one tokenized response. Empty responses are ignored and
  /// return false.
  bool insert(std::span<const std::string> tokens);

  /// Collapses every maximal chain of single-child, non-terminal nodes
  /// (the chain's last node may be terminal or branch) into one node.
  ResponseTrie folded() const;

  const Node& root() const { return nodes_.front(); }
  const Node& node(std::size_t i) const { return nodes_.at(i); }

  /// Node count excluding the root.
  std::size_t size() const { return nodes_.size() - 1; }
  /// Nodes whose payload spans more than one token.
  std::size_t span_nodes() const;
  std::size_t root_children() const { return root().children.size(); }
  std::size_t terminal_total() const;

  /// Root-to-terminal token sequences, each repeated terminal_count times,
  /// in lexicographic child order.
  std::vector<std::vector<std::string>> sequences() const;

  /// Structural equality (same shape, payloads and terminal counts).
  friend bool operator==(const ResponseTrie& a, const ResponseTrie& b);

 private:
  std::size_t fold_into(ResponseTrie& out, std::size_t src) const;
  static bool same_subtree(const ResponseTrie& a, std::size_t i, const ResponseTrie& b, std::size_t j);

  std::vector<Node> nodes_;
};

ResponseTrie build_trie(std::span<const std::vector<std::string>> responses);
inline ResponseTrie fold(const ResponseTrie& trie) { return trie.folded(); }

struct DiversityReport {
  std::size_t n_responses = 0;
  /// Distinct raw strings after NFC and trimming.
  std::size_t templates = 0;
  /// Distinct token sequences (diagnostic).
  std::size_t token_templates = 0;
  /// Responses with no tokens; excluded from the trie.
  std::size_t empty_token_responses = 0;
  std::size_t total_nodes_unfolded = 0;
  std::size_t span_nodes_folded = 0;
  std::size_t folded_nodes_total = 0;
  std::size_t root_children_folded = 0;
  std::optional<double> compression_pct;
  std::size_t unique_start_words = 0;

  double templates_pct() const;
  double span_pct() const;
  double root_children_pct() const;

  std::string templates_cell() const;
  std::string span_cell() const;
  std::string root_children_cell() const;
  std::string compression_cell() const;
};

/// Throws std::invalid_argument on an empty response list.
DiversityReport diversity_report(std::span<const std::string> responses, const Tokenizer& tokenizer);
DiversityReport diversity_report(std::span<const std::string> responses);

}  // namespace polarpref
