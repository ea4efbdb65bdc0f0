#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "polarpref/emotion.hpp"

namespace polarpref {

/// Where an opposite pair comes from: Plutchik's wheel, the emotion dyads,
/// or the authors' own proposal for labels neither source covers.
enum class OppositeSource { wheel, dyads, authors };

std::string_view to_string(OppositeSource s);

struct OppositeEntry {
  Emotion opposite;
  OppositeSource source;
};

/// Total map from every label to its polar opposite. Not symmetric in
/// general (grateful -> disgusted, disgusted -> trusting).
class OppositeTable {
 public:
  /// Validates totality and the absence of fixed points; throws
  /// std::invalid_argument otherwise.
  explicit OppositeTable(const std::array<OppositeEntry, kEmotionCount>& entries);

  /// The shipped table (also at data/opposites.csv).
  static const OppositeTable& standard();

  Emotion opposite_of(Emotion e) const { return entries_[index_of(e)].opposite; }
  const OppositeEntry& entry(Emotion e) const { return entries_[index_of(e)]; }

  friend bool operator==(const OppositeTable& a, const OppositeTable& b);

 private:
  std::array<OppositeEntry, kEmotionCount> entries_;
};

/// CSV with header "label,opposite,source"; every label exactly once.
OppositeTable read_opposite_table(std::istream& in);
OppositeTable read_opposite_table_file(const std::filesystem::path& path);
void write_opposite_table(const OppositeTable& t, std::ostream& out);

inline Emotion opposite_of(const OppositeTable& t, Emotion e) { return t.opposite_of(e); }

}  // namespace polarpref
