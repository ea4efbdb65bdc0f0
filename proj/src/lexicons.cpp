#include "polarpref/lexicons.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "polarpref/text.hpp"

namespace polarpref {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_header_word(std::string_view w) {
  const std::string lw = text::lower(w);
  return lw == "word" || lw == "term";
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

// Shared row walk for both TSV layouts. `row` returns false for rows it
// rejects as malformed.
template <typename RowFn>
LoadTally walk_tsv(std::istream& in, std::size_t min_fields, RowFn&& row) {
  LoadTally tally;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (first) {
      first = false;
      if (!fields.empty() && is_header_word(fields[0])) {
        ++tally.header;
        continue;
      }
    }
    ++tally.rows;
    if (fields.size() < min_fields) {
      ++tally.skipped_malformed;
      continue;
    }
    const std::string word = text::lower(text::trim(fields[0]));
    if (word.empty()) {
      ++tally.skipped_malformed;
      continue;
    }
    if (word.find(' ') != std::string::npos) {
      ++tally.skipped_multiword;
      continue;
    }
    row(word, fields, tally);
  }
  if (in.bad()) throw LexiconError("read failure while loading lexicon");
  return tally;
}

}  // namespace

VadLexicon load_vad(std::istream& in) {
  VadLexicon lex;
  lex.tally = walk_tsv(in, 4, [&](const std::string& word, const std::vector<std::string_view>& f, LoadTally& t) {
    const auto v = parse_double(f[1]);
    const auto a = parse_double(f[2]);
    const auto d = parse_double(f[3]);
    if (!v || !a || !d) {
      ++t.skipped_malformed;
      return;
    }
    if (!in_unit(*v) || !in_unit(*a) || !in_unit(*d)) {
      ++t.skipped_out_of_range;
      return;
    }
    lex.entries.insert_or_assign(word, Vad{*v, *a, *d});
  });
  if (lex.entries.empty()) throw LexiconError("VAD lexicon has no usable entries");
  return lex;
}

VadLexicon load_vad_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LexiconError("cannot open VAD lexicon: " + path.string());
  try {
    return load_vad(in);
  } catch (const LexiconError& e) {
    throw LexiconError(path.string() + ": " + e.what());
  }
}

IntensityLexicon load_intensity(std::istream& in, IntensityCombine combine) {
  struct Acc {
    double max = 0.0;
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::unordered_map<std::string, Acc> acc;
  IntensityLexicon lex;
  lex.tally = walk_tsv(in, 3, [&](const std::string& word, const std::vector<std::string_view>& f, LoadTally& t) {
    const auto score = parse_double(f[2]);
    if (!score) {
      ++t.skipped_malformed;
      return;
    }
    if (!in_unit(*score)) {
      ++t.skipped_out_of_range;
      return;
    }
    auto& a = acc[word];
    a.max = a.n == 0 ? *score : std::max(a.max, *score);
    a.sum += *score;
    ++a.n;
  });
  if (acc.empty()) throw LexiconError("intensity lexicon has no usable entries");
  lex.entries.reserve(acc.size());
  for (const auto& [w, a] : acc) {
    lex.entries.emplace(w, combine == IntensityCombine::max ? a.max : a.sum / static_cast<double>(a.n));
  }
  return lex;
}

IntensityLexicon load_intensity_file(const std::filesystem::path& path, IntensityCombine combine) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LexiconError("cannot open intensity lexicon: " + path.string());
  try {
    return load_intensity(in, combine);
  } catch (const LexiconError& e) {
    throw LexiconError(path.string() + ": " + e.what());
  }
}

NidfTable build_nidf(std::span<const std::string> reference, const Tokenizer& tokenizer, Exec exec,
                     std::string_view tokenizer_version) {
  if (reference.empty()) throw LexiconError("NIDF reference set is empty");

  const auto n = static_cast<std::ptrdiff_t>(reference.size());
  std::vector<std::vector<std::string>> doc_types(reference.size());
  auto distinct = [&](std::ptrdiff_t i) {
    auto toks = tokenizer(reference[static_cast<std::size_t>(i)]);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    doc_types[static_cast<std::size_t>(i)] = std::move(toks);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t i = 0; i < n; ++i) distinct(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) distinct(i);
  }

  NidfTable table;
  table.doc_count = reference.size();
  table.tokenizer_version = std::string(tokenizer_version);
  for (const auto& types : doc_types) {
    for (const auto& w : types) ++table.entries[w].doc_count;
  }
  if (table.entries.empty()) return table;

  const double r = static_cast<double>(table.doc_count);
  std::size_t max_c = 0;
  std::size_t min_c = table.doc_count;
  for (const auto& [_, e] : table.entries) {
    max_c = std::max(max_c, e.doc_count);
    min_c = std::min(min_c, e.doc_count);
  }
  table.min_idf = std::log(r / static_cast<double>(max_c));
  table.max_idf = std::log(r / static_cast<double>(min_c));
  const double span = table.max_idf - table.min_idf;
  for (auto& [_, e] : table.entries) {
    if (span <= 0.0) {
      e.nidf = 0.0;
      continue;
    }
    const double idf = std::log(r / static_cast<double>(e.doc_count));
    e.nidf = std::clamp((idf - table.min_idf) / span, 0.0, 1.0);
  }
  return table;
}

NidfTable build_nidf(std::span<const std::string> reference, Exec exec) {
  return build_nidf(
      reference, [](std::string_view s) { return text::tokenize(s); }, exec, text::kTokenizerVersion);
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_nidf(const NidfTable& table, std::ostream& out) {
  out << "#nidf\tR=" << table.doc_count << "\tmin_idf=" << fmt_double(table.min_idf)
      << "\tmax_idf=" << fmt_double(table.max_idf) << "\ttokenizer=" << table.tokenizer_version << '\n';
  std::vector<const std::pair<const std::string, NidfTable::Entry>*> rows;
  rows.reserve(table.entries.size());
  for (const auto& kv : table.entries) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  for (const auto* kv : rows) out << kv->first << '\t' << fmt_double(kv->second.nidf) << '\t' << kv->second.doc_count << '\n';
}

NidfTable read_nidf(std::istream& in) {
  NidfTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("#nidf", 0) != 0) throw LexiconError("NIDF cache: missing '#nidf' header");
  for (auto field : split_tabs(line)) {
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = field.substr(0, eq);
    const std::string value(field.substr(eq + 1));
    if (key == "R") table.doc_count = std::stoull(value);
    else if (key == "min_idf") table.min_idf = std::stod(value);
    else if (key == "max_idf") table.max_idf = std::stod(value);
    else if (key == "tokenizer") table.tokenizer_version = value;
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    const auto nidf = f.size() == 3 ? parse_double(f[1]) : std::nullopt;
    if (!nidf) throw LexiconError("NIDF cache line " + std::to_string(line_no) + ": malformed row");
    table.entries[std::string(f[0])] = NidfTable::Entry{*nidf, std::stoull(std::string(f[2]))};
  }
  return table;
}

std::string_view to_string(NidfReference r) {
  return r == NidfReference::train_utterances ? "train-utterances" : "train-responses";
}

NidfReference nidf_reference_from_string(std::string_view s) {
  if (s == "train-utterances") return NidfReference::train_utterances;
  if (s == "train-responses") return NidfReference::train_responses;
  throw std::invalid_argument("unknown NIDF reference '" + std::string(s) + "'");
}

std::vector<std::string> nidf_reference_documents(const Corpus& c, NidfReference which) {
  std::vector<std::string> docs;
  for (auto i : c.split_indices(Split::train)) {
    for (const auto& t : c.dialogues()[i].turns) {
      if (which == NidfReference::train_responses && t.role != Role::listener) continue;
      docs.push_back(t.text);
    }
  }
  return docs;
}

}  // namespace polarpref
