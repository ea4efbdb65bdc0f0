#include "polarpref/diversity.hpp"

#include <cstdio>
#include <set>
#include <stdexcept>

#include "polarpref/text.hpp"

namespace polarpref {

ResponseTrie::ResponseTrie() : nodes_(1) {}

bool ResponseTrie::insert(std::span<const std::string> tokens) {
  if (tokens.empty()) return false;
  std::size_t cur = 0;
  for (const auto& tok : tokens) {
    auto it = nodes_[cur].children.find(tok);
    if (it == nodes_[cur].children.end()) {
      const std::size_t idx = nodes_.size();
      Node n;
      n.payload.push_back(tok);
      nodes_.push_back(std::move(n));
      nodes_[cur].children.emplace(tok, idx);
      cur = idx;
    } else {
      cur = it->second;
    }
  }
  ++nodes_[cur].terminal_count;
  return true;
}

std::size_t ResponseTrie::fold_into(ResponseTrie& out, std::size_t src) const {
  Node merged;
  merged.payload = nodes_[src].payload;
  std::size_t end = src;
  while (nodes_[end].children.size() == 1 && nodes_[end].terminal_count == 0) {
    end = nodes_[end].children.begin()->second;
    const auto& p = nodes_[end].payload;
    merged.payload.insert(merged.payload.end(), p.begin(), p.end());
  }
  merged.terminal_count = nodes_[end].terminal_count;
  const std::size_t idx = out.nodes_.size();
  out.nodes_.push_back(std::move(merged));
  for (const auto& [key, child] : nodes_[end].children) {
    const std::size_t c = fold_into(out, child);
    out.nodes_[idx].children.emplace(key, c);
  }
  return idx;
}

ResponseTrie ResponseTrie::folded() const {
  ResponseTrie out;
  out.nodes_[0].terminal_count = nodes_[0].terminal_count;
  for (const auto& [key, child] : nodes_[0].children) {
    const std::size_t c = fold_into(out, child);
    out.nodes_[0].children.emplace(key, c);
  }
  return out;
}

std::size_t ResponseTrie::span_nodes() const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].payload.size() > 1) ++n;
  }
  return n;
}

std::size_t ResponseTrie::terminal_total() const {
  std::size_t n = 0;
  for (const auto& node : nodes_) n += node.terminal_count;
  return n;
}

std::vector<std::vector<std::string>> ResponseTrie::sequences() const {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> path;
  auto walk = [&](auto&& self, std::size_t i) -> void {
    const Node& n = nodes_[i];
    path.insert(path.end(), n.payload.begin(), n.payload.end());
    for (std::size_t k = 0; k < n.terminal_count; ++k) out.push_back(path);
    for (const auto& [_, child] : n.children) self(self, child);
    path.resize(path.size() - n.payload.size());
  };
  walk(walk, 0);
  return out;
}

bool ResponseTrie::same_subtree(const ResponseTrie& a, std::size_t i, const ResponseTrie& b, std::size_t j) {
  const Node& x = a.nodes_[i];
  const Node& y = b.nodes_[j];
  if (x.payload != y.payload || x.terminal_count != y.terminal_count || x.children.size() != y.children.size()) {
    return false;
  }
  auto xi = x.children.begin();
  auto yi = y.children.begin();
  for (; xi != x.children.end(); ++xi, ++yi) {
    if (xi->first != yi->first || !same_subtree(a, xi->second, b, yi->second)) return false;
  }
  return true;
}

bool operator==(const ResponseTrie& a, const ResponseTrie& b) {
  return a.nodes_.size() == b.nodes_.size() && ResponseTrie::same_subtree(a, 0, b, 0);
}

ResponseTrie build_trie(std::span<const std::vector<std::string>> responses) {
  ResponseTrie t;
  for (const auto& r : responses) t.insert(r);
  return t;
}

namespace {

double pct(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

}  // namespace

double DiversityReport::templates_pct() const { return pct(templates, n_responses); }
double DiversityReport::span_pct() const { return pct(span_nodes_folded, total_nodes_unfolded); }
double DiversityReport::root_children_pct() const { return pct(root_children_folded, n_responses); }

std::string DiversityReport::templates_cell() const { return fmt("%zu (%.1f%%)", templates, templates_pct()); }
std::string DiversityReport::span_cell() const {
  return fmt("%zu / %zu (%.1f%%)", span_nodes_folded, total_nodes_unfolded, span_pct());
}
std::string DiversityReport::root_children_cell() const {
  return fmt("%zu (%.1f%%)", root_children_folded, root_children_pct());
}
std::string DiversityReport::compression_cell() const {
  return compression_pct ? fmt("%.2f%%", *compression_pct) : std::string("n/a");
}

DiversityReport diversity_report(std::span<const std::string> responses, const Tokenizer& tokenizer) {
  if (responses.empty()) throw std::invalid_argument("diversity_report: empty response list");
  DiversityReport r;
  r.n_responses = responses.size();

  std::set<std::string> raw;
  std::set<std::vector<std::string>> token_seqs;
  std::set<std::string> starts;
  ResponseTrie trie;
  for (const auto& resp : responses) {
    raw.insert(text::trim(text::nfc(resp)));
    auto toks = tokenizer(resp);
    if (toks.empty()) {
      ++r.empty_token_responses;
      continue;
    }
    starts.insert(toks.front());
    trie.insert(toks);
    token_seqs.insert(std::move(toks));
  }
  r.templates = raw.size();
  r.token_templates = token_seqs.size();
  r.unique_start_words = starts.size();

  const ResponseTrie f = trie.folded();
  r.total_nodes_unfolded = trie.size();
  r.folded_nodes_total = f.size();
  r.span_nodes_folded = f.span_nodes();
  r.root_children_folded = f.root_children();
  if (r.total_nodes_unfolded > 0) {
    r.compression_pct =
        (1.0 - static_cast<double>(r.folded_nodes_total) / static_cast<double>(r.total_nodes_unfolded)) * 100.0;
  }
  return r;
}

DiversityReport diversity_report(std::span<const std::string> responses) {
  return diversity_report(responses, [](std::string_view s) { return text::tokenize(s); });
}

}  // namespace polarpref
