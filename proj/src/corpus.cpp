#include "polarpref/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "polarpref/text.hpp"

namespace polarpref {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Role r) { return r == Role::speaker ? "speaker" : "listener"; }

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "valid" || name == "validation") return Split::valid;
  if (name == "test") return Split::test;
  return std::nullopt;
}

Split split_from_string(std::string_view name) {
  if (auto s = parse_split(name)) return *s;
  throw std::invalid_argument("unknown split: '" + std::string(name) + "'");
}

bool Dialogue::has_target() const {
  return std::any_of(turns.begin(), turns.end(), [](const Turn& t) { return t.role == Role::listener; });
}

std::size_t FilterReport::total_dropped_rows() const {
  std::size_t n = 0;
  for (const auto& [_, c] : dropped_rows) n += c;
  return n;
}

std::size_t FilterReport::total_dropped_dialogues() const {
  std::size_t n = 0;
  for (const auto& [_, c] : dropped_dialogues) n += c;
  return n;
}

double FilterReport::filtered_fraction() const {
  if (dialogues_seen == 0) return 0.0;
  return static_cast<double>(total_dropped_dialogues()) / static_cast<double>(dialogues_seen);
}

void FilterReport::merge(const FilterReport& other) {
  rows_read += other.rows_read;
  dialogues_seen += other.dialogues_seen;
  for (const auto& [k, v] : other.dropped_rows) dropped_rows[k] += v;
  for (const auto& [k, v] : other.dropped_dialogues) dropped_dialogues[k] += v;
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

IngestError::IngestError(std::string source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), source_(std::move(source)), line_(line) {}

Corpus::Corpus(std::vector<Dialogue> dialogues, FilterReport report)
    : dialogues_(std::move(dialogues)), report_(std::move(report)) {
  by_id_.reserve(dialogues_.size());
  for (std::size_t i = 0; i < dialogues_.size(); ++i) {
    const auto& d = dialogues_[i];
    if (!by_id_.emplace(d.id, i).second) {
      throw std::invalid_argument("duplicate dialogue id in corpus: " + d.id);
    }
    const auto s = static_cast<std::size_t>(d.split);
    split_index_[s].push_back(i);
    emotion_index_[s][index_of(d.emotion)].push_back(i);
  }
}

const Dialogue* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &dialogues_[it->second];
}

const Dialogue& Corpus::at(std::string_view id) const {
  if (const auto* d = find(id)) return *d;
  throw std::out_of_range("no dialogue with id " + std::string(id));
}

std::vector<std::string> Corpus::ids_in(Split s) const {
  std::vector<std::string> ids;
  for (auto i : split_indices(s)) ids.push_back(dialogues_[i].id);
  return ids;
}

std::vector<std::string> default_malformed_keywords() {
  // Conversation-id and HIT fragments only show up in text fields when a row's
  // columns were shifted by an unescaped comma.
  return {"hit:", "_conv:"};
}

std::vector<std::string> read_keyword_rules(std::istream& in) {
  std::vector<std::string> rules;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    rules.push_back(line);
  }
  return rules;
}

namespace {

constexpr std::string_view kCommaToken = "_comma_";

std::string unescape_commas(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto hit = s.find(kCommaToken, pos);
    if (hit == std::string_view::npos) {
      out.append(s.substr(pos));
      break;
    }
    out.append(s.substr(pos, hit - pos));
    out.push_back(',');
    pos = hit + kCommaToken.size();
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

struct Columns {
  std::size_t conv_id, utterance_idx, context, prompt, utterance, count;
};

Columns parse_header(std::string_view header, const std::string& source) {
  const auto names = split_commas(header);
  auto find = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return i;
    }
    throw IngestError(source, 1, "unexpected header: missing column '" + std::string(name) + "'");
  };
  return {find("conv_id"), find("utterance_idx"), find("context"), find("prompt"), find("utterance"), names.size()};
}

struct PendingRow {
  int index;
  std::string text;
  bool malformed;
};

struct PendingDialogue {
  std::string id;
  std::optional<Emotion> emotion;
  std::string situation;
  std::vector<PendingRow> rows;
  bool any_row_seen = false;
};

bool contains_any(std::string_view text, const std::vector<std::string>& rules) {
  return std::any_of(rules.begin(), rules.end(),
                     [&](const std::string& r) { return !r.empty() && text.find(r) != std::string_view::npos; });
}

}  // namespace

Corpus import_raw(std::istream& in, const ImportOptions& options) {
  const std::string& source = options.source_name;
  if (!in) throw IngestError(source, 0, "unreadable input stream");

  std::string line;
  if (!std::getline(in, line)) throw IngestError(source, 1, "empty input: header line missing");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Columns cols = parse_header(line, source);

  FilterReport report;
  std::vector<PendingDialogue> pending;
  std::unordered_map<std::string, std::size_t> slot;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.find('\0') != std::string::npos) throw IngestError(source, line_no, "NUL byte in input");
    ++report.rows_read;

    const auto fields = split_commas(line);
    if (fields.size() != cols.count) {
      ++report.dropped_rows[std::string(drop_reason::field_count)];
      continue;
    }
    const std::string conv_id(fields[cols.conv_id]);
    if (conv_id.empty()) {
      ++report.dropped_rows[std::string(drop_reason::field_count)];
      continue;
    }

    auto [it, inserted] = slot.try_emplace(conv_id, pending.size());
    if (inserted) pending.push_back(PendingDialogue{conv_id, std::nullopt, {}, {}});
    PendingDialogue& pd = pending[it->second];
    pd.any_row_seen = true;

    int index = 0;
    const auto idx_field = fields[cols.utterance_idx];
    auto [ptr, ec] = std::from_chars(idx_field.data(), idx_field.data() + idx_field.size(), index);
    if (ec != std::errc() || ptr != idx_field.data() + idx_field.size() || index < 1) {
      ++report.dropped_rows[std::string(drop_reason::bad_index)];
      continue;
    }

    const auto emotion = parse_emotion(fields[cols.context]);
    if (!emotion) {
      ++report.dropped_rows[std::string(drop_reason::unknown_emotion)];
      continue;
    }
    if (pd.emotion && *pd.emotion != *emotion) {
      ++report.dropped_rows[std::string(drop_reason::emotion_mismatch)];
      continue;
    }

    std::string text = text::trim(text::nfc(unescape_commas(fields[cols.utterance])));
    if (text.empty()) {
      ++report.dropped_rows[std::string(drop_reason::empty_text)];
      continue;
    }
    if (std::any_of(pd.rows.begin(), pd.rows.end(), [&](const PendingRow& r) { return r.index == index; })) {
      ++report.dropped_rows[std::string(drop_reason::duplicate_index)];
      continue;
    }

    std::string situation = text::trim(text::nfc(unescape_commas(fields[cols.prompt])));
    const bool malformed =
        contains_any(text, options.malformed_keywords) || contains_any(situation, options.malformed_keywords);
    if (!pd.emotion) {
      pd.emotion = emotion;
      pd.situation = std::move(situation);
    }
    pd.rows.push_back(PendingRow{index, std::move(text), malformed});
  }
  if (in.bad()) throw IngestError(source, line_no, "read failure");

  report.dialogues_seen = pending.size();
  std::vector<Dialogue> dialogues;
  dialogues.reserve(pending.size());
  for (auto& pd : pending) {
    if (pd.rows.empty()) {
      ++report.dropped_dialogues[std::string(drop_reason::no_rows)];
      continue;
    }
    const auto bad_rows = static_cast<std::size_t>(
        std::count_if(pd.rows.begin(), pd.rows.end(), [](const PendingRow& r) { return r.malformed; }));
    if (bad_rows > 0) {
      report.dropped_rows[std::string(drop_reason::malformed_keyword)] += bad_rows;
      ++report.dropped_dialogues[std::string(drop_reason::malformed_keyword)];
      continue;
    }
    std::sort(pd.rows.begin(), pd.rows.end(), [](const PendingRow& a, const PendingRow& b) { return a.index < b.index; });
    bool contiguous = true;
    for (std::size_t i = 0; i < pd.rows.size(); ++i) {
      if (pd.rows[i].index != static_cast<int>(i) + 1) {
        contiguous = false;
        break;
      }
    }
    if (!contiguous) {
      ++report.dropped_dialogues[std::string(drop_reason::index_gap)];
      continue;
    }

    Dialogue d;
    d.id = pd.id;
    d.emotion = *pd.emotion;
    d.situation = std::move(pd.situation);
    d.split = options.split;
    d.turns.reserve(pd.rows.size());
    for (auto& r : pd.rows) d.turns.push_back(Turn{r.index, role_for_index(r.index), std::move(r.text)});
    dialogues.push_back(std::move(d));
  }
  return Corpus(std::move(dialogues), std::move(report));
}

Corpus merge(const std::vector<Corpus>& parts) {
  std::vector<Dialogue> all;
  FilterReport report;
  std::unordered_set<std::string> seen;
  for (const auto& part : parts) {
    report.merge(part.filter_report());
    for (const auto& d : part.dialogues()) {
      if (!seen.insert(d.id).second) {
        ++report.dropped_dialogues[std::string(drop_reason::duplicate_id)];
        continue;
      }
      all.push_back(d);
    }
  }
  return Corpus(std::move(all), std::move(report));
}

Corpus import_raw_dir(const std::filesystem::path& dir, ImportOptions options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IngestError(dir.string(), 0, "not a directory");

  std::vector<Corpus> parts;
  std::vector<std::string> missing;
  for (Split s : kAllSplits) {
    std::vector<fs::path> candidates = {dir / (std::string(to_string(s)) + ".csv")};
    if (s == Split::valid) candidates.push_back(dir / "validation.csv");
    auto found = std::find_if(candidates.begin(), candidates.end(), [](const fs::path& p) { return fs::exists(p); });
    if (found == candidates.end()) {
      missing.emplace_back(to_string(s));
      continue;
    }
    std::ifstream in(*found, std::ios::binary);
    if (!in) throw IngestError(found->string(), 0, "cannot open file");
    options.split = s;
    options.source_name = found->string();
    parts.push_back(import_raw(in, options));
  }
  if (parts.empty()) throw IngestError(dir.string(), 0, "no split files (train.csv, valid.csv, test.csv) found");

  Corpus merged = merge(parts);
  if (missing.empty()) return merged;
  FilterReport report = merged.filter_report();
  for (const auto& m : missing) report.warnings.push_back("split file for '" + m + "' not found; split left empty");
  return Corpus(merged.dialogues(), std::move(report));
}

std::optional<ResponseTarget> last_response_target(const Dialogue& d) {
  auto it = std::find_if(d.turns.rbegin(), d.turns.rend(), [](const Turn& t) { return t.role == Role::listener; });
  if (it == d.turns.rend()) return std::nullopt;
  const Turn& target = *it;
  ResponseTarget out{{}, target};
  for (const auto& t : d.turns) {
    if (t.index < target.index) out.context.push_back(t);
  }
  return out;
}

EmotionGroups group_by_emotion(const Corpus& c, Split split) {
  EmotionGroups groups;
  for (Emotion e : all_emotions()) {
    for (auto i : c.emotion_indices(split, e)) groups[index_of(e)].push_back(c.dialogues()[i].id);
  }
  return groups;
}

EmotionGroups group_by_emotion(const Corpus& c, std::string_view split) { return group_by_emotion(c, split_from_string(split)); }

void write_canonical(const Corpus& c, std::ostream& out) {
  for (const auto& d : c.dialogues()) {
    ordered_json j;
    j["id"] = d.id;
    j["split"] = to_string(d.split);
    j["emotion"] = to_string(d.emotion);
    j["situation"] = d.situation;
    auto turns = ordered_json::array();
    for (const auto& t : d.turns) {
      ordered_json tj;
      tj["index"] = t.index;
      tj["role"] = to_string(t.role);
      tj["text"] = t.text;
      turns.push_back(std::move(tj));
    }
    j["turns"] = std::move(turns);
    out << j.dump() << '\n';
  }
}

Corpus read_canonical(std::istream& in, const std::string& source_name) {
  std::vector<Dialogue> dialogues;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Dialogue d;
      d.id = j.at("id").get<std::string>();
      d.split = split_from_string(j.at("split").get<std::string>());
      d.emotion = emotion_from_string(j.at("emotion").get<std::string>());
      d.situation = j.value("situation", std::string{});
      int expected = 1;
      for (const auto& tj : j.at("turns")) {
        Turn t;
        t.index = tj.at("index").get<int>();
        t.text = tj.at("text").get<std::string>();
        t.role = role_for_index(t.index);
        if (tj.contains("role") && tj["role"].get<std::string>() != to_string(t.role)) {
          throw std::invalid_argument("turn " + std::to_string(t.index) + " has the wrong role for its parity");
        }
        if (t.index != expected++) throw std::invalid_argument("turn indices are not 1..n contiguous");
        d.turns.push_back(std::move(t));
      }
      dialogues.push_back(std::move(d));
    } catch (const std::exception& e) {
      throw IngestError(source_name, line_no, e.what());
    }
  }
  if (in.bad()) throw IngestError(source_name, line_no, "read failure");
  try {
    return Corpus(std::move(dialogues), FilterReport{});
  } catch (const std::invalid_argument& e) {
    throw IngestError(source_name, 0, e.what());
  }
}

Corpus read_canonical_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(path.string(), 0, "cannot open file");
  return read_canonical(in, path.string());
}

}  // namespace polarpref
