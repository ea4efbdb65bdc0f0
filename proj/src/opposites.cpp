#include "polarpref/opposites.hpp"

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace polarpref {

std::string_view to_string(OppositeSource s) {
  switch (s) {
    case OppositeSource::wheel: return "wheel";
    case OppositeSource::dyads: return "dyads";
    case OppositeSource::authors: return "authors";
  }
  return "?";
}

namespace {

OppositeSource source_from_string(std::string_view s) {
  if (s == "wheel") return OppositeSource::wheel;
  if (s == "dyads") return OppositeSource::dyads;
  if (s == "authors") return OppositeSource::authors;
  throw std::invalid_argument("unknown opposite source: '" + std::string(s) + "'");
}

// Row order follows the published lookup table.
constexpr std::string_view kStandardCsv =
    "label,opposite,source\n"
    "afraid,angry,wheel\n"
    "angry,afraid,wheel\n"
    "sad,joyful,wheel\n"
    "grateful,disgusted,wheel\n"
    "surprised,anticipating,wheel\n"
    "trusting,disgusted,wheel\n"
    "disgusted,trusting,wheel\n"
    "anticipating,surprised,wheel\n"
    "content,anxious,wheel\n"
    "apprehensive,annoyed,wheel\n"
    "joyful,sad,wheel\n"
    "proud,ashamed,dyads\n"
    "prepared,anxious,dyads\n"
    "ashamed,proud,dyads\n"
    "guilty,proud,dyads\n"
    "nostalgic,hopeful,dyads\n"
    "anxious,content,dyads\n"
    "hopeful,nostalgic,dyads\n"
    "sentimental,apprehensive,authors\n"
    "jealous,faithful,authors\n"
    "embarrassed,confident,authors\n"
    "excited,devastated,authors\n"
    "annoyed,apprehensive,authors\n"
    "lonely,caring,authors\n"
    "faithful,jealous,authors\n"
    "terrified,furious,authors\n"
    "confident,embarrassed,authors\n"
    "furious,terrified,authors\n"
    "disappointed,impressed,authors\n"
    "caring,lonely,authors\n"
    "impressed,disappointed,authors\n"
    "devastated,excited,authors\n";

std::string trim_ascii(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

OppositeTable::OppositeTable(const std::array<OppositeEntry, kEmotionCount>& entries) : entries_(entries) {
  for (Emotion e : all_emotions()) {
    const auto& entry = entries_[index_of(e)];
    if (index_of(entry.opposite) >= kEmotionCount) throw std::invalid_argument("opposite outside the label set");
    if (entry.opposite == e) {
      throw std::invalid_argument("label '" + std::string(to_string(e)) + "' maps to itself");
    }
  }
}

const OppositeTable& OppositeTable::standard() {
  static const OppositeTable table = [] {
    std::istringstream in{std::string(kStandardCsv)};
    return read_opposite_table(in);
  }();
  return table;
}

bool operator==(const OppositeTable& a, const OppositeTable& b) {
  for (Emotion e : all_emotions()) {
    if (a.entry(e).opposite != b.entry(e).opposite || a.entry(e).source != b.entry(e).source) return false;
  }
  return true;
}

OppositeTable read_opposite_table(std::istream& in) {
  std::array<std::optional<OppositeEntry>, kEmotionCount> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_ascii(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(trim_ascii(f));
    if (!header_seen) {
      header_seen = true;
      if (fields.size() >= 2 && fields[0] == "label" && fields[1] == "opposite") continue;
    }
    if (fields.size() < 2 || fields.size() > 3) {
      throw std::invalid_argument("opposite table line " + std::to_string(line_no) + ": expected label,opposite,source");
    }
    const Emotion label = emotion_from_string(fields[0]);
    const Emotion opposite = emotion_from_string(fields[1]);
    const OppositeSource source =
        fields.size() == 3 && !fields[2].empty() ? source_from_string(fields[2]) : OppositeSource::authors;
    auto& slot = rows[index_of(label)];
    if (slot) {
      throw std::invalid_argument("opposite table line " + std::to_string(line_no) + ": duplicate label '" +
                                  fields[0] + "'");
    }
    slot = OppositeEntry{opposite, source};
  }
  std::array<OppositeEntry, kEmotionCount> entries{};
  for (Emotion e : all_emotions()) {
    const auto& r = rows[index_of(e)];
    if (!r) throw std::invalid_argument("opposite table is missing label '" + std::string(to_string(e)) + "'");
    entries[index_of(e)] = *r;
  }
  return OppositeTable(entries);
}

OppositeTable read_opposite_table_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open opposite table: " + path.string());
  return read_opposite_table(in);
}

void write_opposite_table(const OppositeTable& t, std::ostream& out) {
  out << "label,opposite,source\n";
  for (Emotion e : all_emotions()) {
    out << to_string(e) << ',' << to_string(t.opposite_of(e)) << ',' << to_string(t.entry(e).source) << '\n';
  }
}

}  // namespace polarpref
