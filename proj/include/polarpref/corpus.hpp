#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polarpref/emotion.hpp"

namespace polarpref {

enum class Role { speaker, listener };
enum class Split { train, valid, test };

inline constexpr std::array<Split, 3> kAllSplits = {Split::train, Split::valid, Split::test};

std::string_view to_string(Role r);
std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view name);
/// Throws std::invalid_argument naming the bad split.
Split split_from_string(std::string_view name);

/// Speaker turns are odd, listener turns even (1-based).
constexpr Role role_for_index(int index) { return index % 2 == 1 ? Role::speaker : Role::listener; }

struct Turn {
  int index = 0;
  Role role = Role::speaker;
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::string id;
  Emotion emotion = Emotion::afraid;
  std::string situation;
  std::vector<Turn> turns;
  Split split = Split::train;

  /// False for dialogues without any even (listener) turn; these stay in the
  /// corpus but are never used as generation targets.
  bool has_target() const;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// Row and dialogue drop tallies, keyed by reason.
struct FilterReport {
  std::size_t rows_read = 0;
  std::size_t dialogues_seen = 0;
  std::map<std::string, std::size_t> dropped_rows;
  std::map<std::string, std::size_t> dropped_dialogues;
  std::vector<std::string> warnings;

  std::size_t total_dropped_rows() const;
  std::size_t total_dropped_dialogues() const;
  /// Dropped dialogues over dialogues seen; 0 when nothing was seen.
  double filtered_fraction() const;
  bool empty() const { return dropped_rows.empty() && dropped_dialogues.empty(); }

  void merge(const FilterReport& other);
};

namespace drop_reason {
inline constexpr std::string_view field_count = "field_count";
inline constexpr std::string_view bad_index = "bad_utterance_index";
inline constexpr std::string_view unknown_emotion = "unknown_emotion";
inline constexpr std::string_view emotion_mismatch = "emotion_mismatch";
inline constexpr std::string_view empty_text = "empty_text";
inline constexpr std::string_view duplicate_index = "duplicate_index";
inline constexpr std::string_view malformed_keyword = "malformed_keyword";
inline constexpr std::string_view index_gap = "index_gap";
inline constexpr std::string_view no_rows = "no_valid_rows";
inline constexpr std::string_view duplicate_id = "duplicate_id";
}  // namespace drop_reason

/// Fatal ingest failure (unreadable input, wrong layout). Row-level problems
/// are never fatal; they end up in the FilterReport.
class IngestError : public std::runtime_error {
 public:
  IngestError(std::string source, std::size_t line, const std::string& what);
  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Immutable, id-indexed collection of dialogues with per-split and
/// per-(split, emotion) indexes. Dialogue order is source order.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Dialogue> dialogues, FilterReport report);

  const std::vector<Dialogue>& dialogues() const { return dialogues_; }
  std::size_t size() const { return dialogues_.size(); }
  const FilterReport& filter_report() const { return report_; }

  const Dialogue* find(std::string_view id) const;
  const Dialogue& at(std::string_view id) const;

  /// Positions into dialogues() for a split, in corpus order.
  const std::vector<std::size_t>& split_indices(Split s) const { return split_index_[static_cast<std::size_t>(s)]; }
  /// Positions into dialogues() for a (split, emotion) pair, in corpus order.
  const std::vector<std::size_t>& emotion_indices(Split s, Emotion e) const {
    return emotion_index_[static_cast<std::size_t>(s)][index_of(e)];
  }

  std::vector<std::string> ids_in(Split s) const;

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.dialogues_ == b.dialogues_; }

 private:
  std::vector<Dialogue> dialogues_;
  FilterReport report_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::array<std::vector<std::size_t>, 3> split_index_;
  std::array<std::array<std::vector<std::size_t>, kEmotionCount>, 3> emotion_index_;
};

/// Substring rules marking a dialogue as malformed. The defaults catch rows
/// whose fields were shifted into the text columns by bad escaping.
std::vector<std::string> default_malformed_keywords();
/// One rule per line; blank lines and lines starting with '#' are ignored.
std::vector<std::string> read_keyword_rules(std::istream& in);

struct ImportOptions {
  Split split = Split::train;
  std::vector<std::string> malformed_keywords = default_malformed_keywords();
  /// Used in diagnostics only.
  std::string source_name = "<stream>";
};

/// Parses one split of the raw corpus CSV (one row per utterance).
Corpus import_raw(std::istream& in, const ImportOptions& options);

/// Imports train.csv / valid.csv / test.csv from a directory. Missing split
/// files are skipped with a warning; at least one must exist.
Corpus import_raw_dir(const std::filesystem::path& dir, ImportOptions options);

/// Concatenates corpora (in argument order); later duplicate ids are dropped
/// and tallied.
Corpus merge(const std::vector<Corpus>& parts);

struct ResponseTarget {
  std::vector<Turn> context;
  Turn target;
};

/// The highest-index listener turn and everything before it. A trailing
/// speaker turn after it is ignored. nullopt when there is no listener turn.
std::optional<ResponseTarget> last_response_target(const Dialogue& d);

using EmotionGroups = std::array<std::vector<std::string>, kEmotionCount>;

/// Partition of a split's dialogue ids by label (index = Emotion).
EmotionGroups group_by_emotion(const Corpus& c, Split split);
/// Throws std::invalid_argument for an unknown split name.
EmotionGroups group_by_emotion(const Corpus& c, std::string_view split);

/// Canonical JSON-lines form, one dialogue per line.
void write_canonical(const Corpus& c, std::ostream& out);
Corpus read_canonical(std::istream& in, const std::string& source_name = "<stream>");
Corpus read_canonical_file(const std::filesystem::path& path);

}  // namespace polarpref
