#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polarpref/config.hpp"
#include "polarpref/corpus.hpp"
#include "polarpref/diversity.hpp"
#include "polarpref/exec.hpp"
#include "polarpref/external.hpp"
#include "polarpref/features.hpp"
#include "polarpref/lexicons.hpp"
#include "polarpref/opposites.hpp"
#include "polarpref/preference.hpp"
#include "polarpref/report.hpp"
#include "polarpref/stats.hpp"
#include "polarpref/text.hpp"

namespace polarpref::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Helpers ------------------------------------------------------------------

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << content;
  out.flush();
  if (!out) throw DataError("failed writing " + p.string());
}

std::string join(const std::vector<std::string>& xs, const char* sep = ", ") {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += sep;
    out += x;
  }
  return out;
}

std::string list_head(const std::vector<std::string>& xs, std::size_t n = 20) {
  std::vector<std::string> head(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(std::min(n, xs.size())));
  std::string s = join(head);
  if (xs.size() > n) s += ", ... (" + std::to_string(xs.size()) + " total)";
  return s;
}

Split parse_split_arg(const std::string& s) {
  auto sp = parse_split(s);
  if (!sp) throw UsageError("unknown split '" + s + "' (expected train, valid or test)");
  return *sp;
}

void print_filter_report(const FilterReport& r, std::ostream& out) {
  out << "rows read: " << r.rows_read << "\n"
      << "dialogues seen: " << r.dialogues_seen << "\n";
  for (const auto& [reason, n] : r.dropped_rows) out << "dropped rows (" << reason << "): " << n << "\n";
  for (const auto& [reason, n] : r.dropped_dialogues) out << "dropped dialogues (" << reason << "): " << n << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f%%", r.filtered_fraction() * 100.0);
  out << "filtered fraction: " << buf << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
}

struct Generation {
  std::string dialogue_id;
  std::string response;
};

std::vector<Generation> read_generations(const fs::path& p) {
  auto in = open_in(p);
  std::vector<Generation> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      Generation g{j.at("dialogue_id").get<std::string>(), j.at("response").get<std::string>()};
      if (!seen.insert(g.dialogue_id).second) {
        throw DataError(p.string() + ":" + std::to_string(line_no) + ": duplicate dialogue_id '" + g.dialogue_id + "'");
      }
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw DataError(p.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw DataError("generations file " + p.string() + " is empty");
  return out;
}

/// Numbers from a plain list, a one-column CSV or JSON lines.
std::vector<double> read_vector(const fs::path& p, const std::string& field) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot open vector file " + p.string());
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string where = p.string() + ":" + std::to_string(line_no);
    if (line[first] == '{') {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw UsageError(where + ": " + e.what());
      }
      const json* cur = &j;
      std::stringstream path(field.empty() ? std::string("value") : field);
      for (std::string part; std::getline(path, part, '.');) {
        if (!cur->is_object() || !cur->contains(part)) throw UsageError(where + ": missing field '" + field + "'");
        cur = &cur->at(part);
      }
      if (cur->is_null()) continue;  // undefined value
      if (!cur->is_number()) throw UsageError(where + ": field is not a number");
      out.push_back(cur->get<double>());
      continue;
    }
    std::string cell = line.substr(first, line.find(',', first) - first);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r' || cell.back() == '\t')) cell.pop_back();
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument("trailing characters");
      out.push_back(v);
    } catch (const std::exception&) {
      if (out.empty() && line_no == 1) continue;  // header
      throw UsageError(where + ": not a number: '" + cell + "'");
    }
  }
  if (out.empty()) throw UsageError("vector file " + p.string() + " has no values");
  return out;
}

ordered_json read_json_file(const fs::path& p) {
  auto in = open_in(p);
  try {
    return ordered_json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

std::vector<ExampleScore> read_report_rows(const json& report, const fs::path& report_path) {
  const fs::path rows_path = report_path.parent_path() / report.at("per_example").get<std::string>();
  auto in = open_in(rows_path);
  return report::read_examples(in);
}

// corpus import ---------------------------------------------------------------

struct CorpusImportArgs {
  std::string raw_dir;
  std::string out;
  std::string keywords;
};

int cmd_corpus_import(const CorpusImportArgs& a, std::ostream& out) {
  ImportOptions opt;
  if (!a.keywords.empty()) {
    auto in = open_in(a.keywords);
    opt.malformed_keywords = read_keyword_rules(in);
  }
  const Corpus c = import_raw_dir(a.raw_dir, opt);
  std::ostringstream buf;
  write_canonical(c, buf);
  write_file(a.out, buf.str());
  for (Split s : kAllSplits) out << to_string(s) << " dialogues: " << c.split_indices(s).size() << "\n";
  print_filter_report(c.filter_report(), out);
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

// prefs build -----------------------------------------------------------------

struct PrefsArgs {
  std::string corpus;
  std::string split = "train";
  int epochs = 1;
  std::uint64_t seed = 0;
  std::string table;
  std::string out;
  std::string system;
  bool has_system = false;
};

int cmd_prefs_build(const PrefsArgs& a, std::ostream& out) {
  const Split split = parse_split_arg(a.split);
  EpochPlan plan{a.seed, a.epochs, split};
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const OppositeTable table = a.table.empty() ? OppositeTable::standard() : read_opposite_table_file(a.table);
  const Corpus c = read_canonical_file(a.corpus);
  const auto epochs = build_multi_epoch(c, plan, table);
  const std::optional<std::string> system = a.has_system ? std::optional<std::string>(a.system) : std::nullopt;
  fs::create_directories(a.out);
  for (const auto& e : epochs) {
    std::ostringstream buf;
    serialize_preferences(e.examples, buf, system);
    const fs::path p = fs::path(a.out) / ("prefs." + std::string(to_string(split)) + ".epoch" +
                                          std::to_string(e.epoch) + ".jsonl");
    write_file(p, buf.str());
    out << "epoch " << e.epoch << ": " << e.summary.examples << " examples -> " << p.string() << "\n";
  }
  const auto& s = epochs.front().summary;
  out << "skipped (no listener turn): " << s.skipped_no_target << "\n";
  out << "per emotion:";
  for (Emotion e : all_emotions()) out << " " << to_string(e) << "=" << s.per_emotion[index_of(e)];
  out << "\n";
  for (const auto& e : epochs) {
    out << "epoch " << e.epoch << " collisions: redrawn " << e.summary.redraws << ", unresolved "
        << e.summary.unresolved_collisions.size();
    if (!e.summary.unresolved_collisions.empty()) out << " (" << list_head(e.summary.unresolved_collisions) << ")";
    out << "\n";
  }
  return kExitOk;
}

// eval ------------------------------------------------------------------------

struct EvalArgs {
  std::string config_file;
  std::string generations;
  bool ground_truth = false;
  std::string corpus;
  std::string lexicons;
  std::string vad;
  std::string intensity;
  std::string metrics;
  std::string out;
  bool paper_table = false;
  std::string prompt_mode;
  std::string nidf_reference;
  std::string nidf_cache;
  bool include_situation = false;
  std::string intensity_combine;
  std::string epitome_gen;
  std::string epitome_gt;
  std::string diff_mode;
  std::string similarity;
  std::string model_name;
  std::vector<std::string> compare;
  std::optional<std::size_t> resamples;
  std::optional<std::uint64_t> seed;
};

RunConfig eval_config(const EvalArgs& a) {
  RunConfig c;
  if (!a.config_file.empty()) {
    if (!fs::exists(a.config_file)) throw DataError("config file not found: " + a.config_file);
    c = read_run_config_file(a.config_file);
  }
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) set_config_value(c, key, v);
  };
  set("corpus", a.corpus);
  set("generations", a.generations);
  set("vad", a.vad);
  set("intensity", a.intensity);
  set("metrics", a.metrics);
  set("out_dir", a.out);
  set("prompt_mode", a.prompt_mode);
  set("nidf_reference", a.nidf_reference);
  set("nidf_cache", a.nidf_cache);
  set("intensity_combine", a.intensity_combine);
  set("epitome_gen", a.epitome_gen);
  set("epitome_gt", a.epitome_gt);
  set("diff_mode", a.diff_mode);
  set("similarity", a.similarity);
  set("model_name", a.model_name);
  if (a.include_situation) c.include_situation = true;
  if (a.resamples) c.resamples = *a.resamples;
  if (a.seed) c.seed = *a.seed;
  if (a.ground_truth) {
    c.generations.clear();
    if (a.model_name.empty() && c.model_name == "model") c.model_name = "Human Response";
  }

  if (c.wants("iva") && (c.vad.empty() || c.intensity.empty())) {
    if (!a.lexicons.empty()) apply_lexicon_dir(c, a.lexicons);
    else if (auto dir = lexicon_dir_from_env()) apply_lexicon_dir(c, *dir);
  }
  if (c.corpus.empty()) throw UsageError("eval needs --corpus (or corpus = ... in the config file)");
  if (c.out_dir.empty()) throw UsageError("eval needs --out (or out_dir = ... in the config file)");
  if (c.generations.empty() && !a.ground_truth) throw UsageError("eval needs --generations or --ground-truth");
  if (c.wants("iva") && c.vad.empty() && c.intensity.empty()) {
    throw UsageError("metric 'iva' needs --vad/--intensity, --lexicons or " + std::string(kLexiconDirEnv));
  }
  if (c.epitome_gen.empty() != c.epitome_gt.empty()) {
    throw UsageError("--epitome-gen and --epitome-gt must be given together");
  }
  if (const auto missing = missing_paths(c); !missing.empty()) {
    throw DataError("missing input files: " + join(missing));
  }
  return c;
}

NidfTable load_or_build_nidf(const RunConfig& c, const Corpus& corpus, std::vector<std::string>& warnings,
                             std::ostream& log) {
  if (!c.nidf_cache.empty() && fs::exists(c.nidf_cache)) {
    auto in = open_in(c.nidf_cache);
    NidfTable t = read_nidf(in);
    if (t.tokenizer_version != c.tokenizer_version) {
      throw DataError("NIDF cache " + c.nidf_cache + " was built with tokenizer '" + t.tokenizer_version +
                      "', expected '" + c.tokenizer_version + "'");
    }
    log << "loaded NIDF cache " << c.nidf_cache << " (R=" << t.doc_count << ")\n";
    return t;
  }
  const auto docs = nidf_reference_documents(corpus, c.nidf_reference);
  if (docs.empty()) throw DataError("corpus has no train-split documents to build the NIDF table from");
  NidfTable t = build_nidf(docs);
  if (!c.nidf_cache.empty()) {
    std::ostringstream buf;
    write_nidf(t, buf);
    write_file(c.nidf_cache, buf.str());
    log << "wrote NIDF cache " << c.nidf_cache << "\n";
  }
  if (t.doc_count < 2) warnings.push_back("NIDF reference has fewer than two documents");
  return t;
}

void add_comparisons(const std::vector<std::string>& others, const RunConfig& c,
                     const std::vector<ExampleScore>& scores, report::ReportParts& parts) {
  for (const auto& path : others) {
    const auto other = read_json_file(path);
    try {
      report::check_schema(other);
    } catch (const report::SchemaError& e) {
      throw DataError(path + ": " + e.what());
    }
    const auto rows = read_report_rows(other, path);
    const std::string name = other.at("model").get<std::string>();

    auto collect = [](const std::vector<ExampleScore>& xs, auto get) {
      std::vector<double> v;
      for (const auto& x : xs) {
        if (auto y = get(x)) v.push_back(*y);
      }
      return v;
    };
    std::vector<std::pair<std::string, std::function<std::optional<double>(const ExampleScore&)>>> metrics;
    if (c.wants("nidf")) metrics.emplace_back("specificity", [](const ExampleScore& s) { return s.specificity; });
    if (c.wants("iva")) {
      for (Dim d : kDims) {
        metrics.emplace_back(std::string(to_string(d)) + "_distance",
                             [d](const ExampleScore& s) { return s.pair.distance(d); });
      }
    }
    for (const auto& [metric, get] : metrics) {
      const auto a = collect(scores, get);
      const auto b = collect(rows, get);
      if (a.size() < 2 || b.size() < 2) {
        parts.warnings.push_back("comparison of " + metric + " with '" + name + "' skipped: too few defined values");
        continue;
      }
      stats::PermutationOptions opt;
      opt.n_resamples = c.resamples;
      opt.seed = c.seed;
      parts.stats.push_back({metric + " vs " + name, stats::permutation_test(a, b, opt)});
      parts.stats.push_back({metric + " vs " + name, stats::welch_t(a, b)});
    }
  }
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig c = eval_config(a);
  const Corpus corpus = read_canonical_file(c.corpus);

  std::vector<EvalItem> items;
  if (a.ground_truth) {
    for (auto i : corpus.split_indices(Split::test)) {
      const Dialogue& d = corpus.dialogues()[i];
      if (auto t = last_response_target(d)) items.push_back(EvalItem{d.id, t->context, t->target.text, d.situation});
    }
    if (items.empty()) throw DataError("corpus has no test-split dialogues with a response");
  } else {
    const auto gens = read_generations(c.generations);
    std::vector<std::string> unknown;
    for (const auto& g : gens) {
      const Dialogue* d = corpus.find(g.dialogue_id);
      std::optional<ResponseTarget> t;
      if (d && d->split == Split::test) t = last_response_target(*d);
      if (!t) {
        unknown.push_back(g.dialogue_id);
        continue;
      }
      items.push_back(EvalItem{g.dialogue_id, t->context, g.response, d->situation});
    }
    if (!unknown.empty()) {
      throw DataError(std::to_string(unknown.size()) +
                      " generation id(s) do not resolve to test dialogues: " + list_head(unknown));
    }
  }
  if (!c.include_situation) {
    for (auto& it : items) it.situation.reset();
  }

  report::ReportParts parts;
  parts.config = c;
  parts.n_examples = items.size();

  std::optional<NidfTable> nidf;
  std::optional<VadLexicon> vad;
  std::optional<IntensityLexicon> inten;
  if (c.wants("nidf")) nidf = load_or_build_nidf(c, corpus, parts.warnings, err);
  if (c.wants("iva")) {
    if (!c.vad.empty()) {
      vad = load_vad_file(c.vad);
      if (vad->tally.skipped() > 0) {
        parts.warnings.push_back("VAD lexicon: skipped " + std::to_string(vad->tally.skipped()) + " rows");
      }
    }
    if (!c.intensity.empty()) {
      inten = load_intensity_file(c.intensity, c.intensity_combine);
      if (inten->tally.skipped() > 0) {
        parts.warnings.push_back("intensity lexicon: skipped " + std::to_string(inten->tally.skipped()) + " rows");
      }
    }
  }

  ScoringSetup setup;
  setup.nidf = nidf ? &*nidf : nullptr;
  setup.lex = WordLexicons{vad ? &*vad : nullptr, inten ? &*inten : nullptr};
  setup.mode = c.prompt_mode;
  setup.include_situation = c.include_situation;
  const auto scores = score_examples(items, setup);

  if (c.wants("length")) parts.length = length_stats_from_scores(scores);
  if (c.wants("nidf") || c.wants("iva")) {
    const auto f = aggregate_feature_report(scores);
    if (c.wants("nidf")) parts.specificity = f.specificity;
    if (c.wants("iva")) parts.iva = f;
  }
  if (c.wants("diversity")) {
    std::vector<std::string> responses;
    for (const auto& it : items) responses.push_back(it.response);
    parts.diversity = diversity_report(responses);
  }
  if (!c.epitome_gen.empty()) {
    const auto gen = read_epitome_file(c.epitome_gen);
    const auto gt = read_epitome_file(c.epitome_gt);
    parts.diff_per_example = diff_epitome(gen, gt, DiffMode::per_example);
    parts.diff_dataset_mean = diff_epitome(gen, gt, DiffMode::dataset_mean);
  }
  if (!c.similarity.empty()) parts.similarity = aggregate_similarity(read_similarity_file(c.similarity));
  add_comparisons(a.compare, c, scores, parts);

  const fs::path dir(c.out_dir);
  std::ostringstream rows;
  for (const auto& s : scores) rows << report::example_json(s).dump() << '\n';
  write_file(dir / report::kPerExampleFile, rows.str());
  const auto rep = report::build_report(parts);
  write_file(dir / "report.json", rep.dump(2) + "\n");
  err << "wrote " << (dir / "report.json").string() << " (" << scores.size() << " examples)\n";
  for (const auto& w : parts.warnings) err << "warning: " << w << "\n";
  if (a.paper_table) {
    const std::vector<json> reps = {json(rep)};
    const auto md = report::render_markdown(reps);
    write_file(dir / "report.md", md);
    out << md;
  }
  return kExitOk;
}

// stats -----------------------------------------------------------------------

struct StatsArgs {
  std::string a;
  std::string b;
  std::string test;
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  std::string alternative = "two-sided";
  bool exact = false;
  std::size_t bonferroni = 1;
  std::string d_variant = "pooled";
  std::string granularity = "example";
  double alpha = 0.05;
  std::string field;
  std::string out;
  std::optional<std::uint64_t> n01;
  std::optional<std::uint64_t> n10;
  std::uint64_t exact_threshold = 25;
};

int cmd_stats(const StatsArgs& s, std::ostream& out) {
  stats::Alternative alt;
  stats::CohenVariant variant;
  try {
    alt = stats::alternative_from_string(s.alternative);
    variant = stats::cohen_variant_from_string(s.d_variant);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  stats::TestResult r;
  if (s.test == "mcnemar" && s.n01 && s.n10) {
    r = stats::mcnemar(*s.n01, *s.n10, s.exact_threshold);
  } else {
    if (s.a.empty() || s.b.empty()) throw UsageError("--a and --b are required for --test " + s.test);
    const auto a = read_vector(s.a, s.field);
    const auto b = read_vector(s.b, s.field);
    try {
      if (s.test == "permutation") {
        if (s.exact) {
          r = stats::permutation_test_exact(a, b, alt);
        } else {
          stats::PermutationOptions opt;
          opt.n_resamples = s.resamples;
          opt.seed = s.seed;
          opt.alternative = alt;
          opt.alpha = s.alpha;
          r = stats::permutation_test(a, b, opt);
        }
      } else if (s.test == "welch") {
        r = stats::welch_t(a, b, alt);
      } else if (s.test == "paired") {
        r = stats::paired_t_cohen_d(a, b, alt, variant);
      } else {
        const auto [n01, n10] = stats::discordant_counts(a, b);
        r = stats::mcnemar(n01, n10, s.exact_threshold);
      }
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  r.meta["granularity"] = s.granularity;
  if (s.bonferroni > 1) stats::apply_bonferroni(r, s.bonferroni);
  const std::string text = report::test_result_json(r).dump(2) + "\n";
  out << text;
  if (!s.out.empty()) write_file(s.out, text);
  return kExitOk;
}

// report / verify -------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> in;
  std::string format = "md";
  std::string table = "diversity";
  std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<json> reports;
  for (const auto& p : a.in) {
    reports.push_back(json(read_json_file(p)));
    try {
      report::check_schema(reports.back());
    } catch (const report::SchemaError& e) {
      throw DataError(p + ": " + e.what());
    }
  }
  std::string text;
  if (a.format == "md") {
    text = report::render_markdown(reports);
  } else if (a.format == "csv") {
    try {
      text = report::render_csv(reports, a.table);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    std::vector<std::vector<ExampleScore>> rows;
    for (std::size_t i = 0; i < reports.size(); ++i) rows.push_back(read_report_rows(reports[i], a.in[i]));
    text = report::render_plotdata(reports, rows);
  }
  if (a.out.empty()) out << text;
  else write_file(a.out, text);
  return kExitOk;
}

struct VerifyArgs {
  std::string in;
  double tolerance = 1e-9;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const json rep = read_json_file(a.in);
  try {
    report::check_schema(rep);
  } catch (const report::SchemaError& e) {
    throw DataError(a.in + ": " + e.what());
  }
  const auto rows = read_report_rows(rep, a.in);
  const auto v = report::verify_report(rep, rows, a.tolerance);
  if (!v.ok()) {
    for (const auto& m : v.mismatches) err << "mismatch: " << m << "\n";
    err << "verify failed: " << v.mismatches.size() << " of " << v.checked << " checks\n";
    return kExitData;
  }
  out << "verified " << v.checked << " aggregate values against " << rows.size() << " rows\n";
  return kExitOk;
}

// annotations / diversity -------------------------------------------------------

struct AnnotationArgs {
  std::string in;
  std::vector<std::string> pairs;
  std::string alternative = "greater";
  std::string d_variant = "pooled";
  bool bonferroni = false;
  std::string out;
};

int cmd_annotations(const AnnotationArgs& a, std::ostream& out) {
  auto in = open_in(a.in);
  const auto records = stats::read_annotations(in);
  const auto agg = stats::human_eval_aggregate(records);
  const auto alt = stats::alternative_from_string(a.alternative);
  const auto variant = stats::cohen_variant_from_string(a.d_variant);

  ordered_json j;
  ordered_json models = ordered_json::object();
  for (const auto& [model, means] : agg.means) {
    ordered_json m;
    for (stats::HumanDim d : stats::kHumanDims) m[std::string(stats::to_string(d))] = means[static_cast<std::size_t>(d)];
    m["consistency_fluency"] = agg.consistency_rate.at(model);
    models[model] = std::move(m);
  }
  j["models"] = std::move(models);
  auto tests = ordered_json::array();
  const std::size_t m = a.pairs.size() * stats::kHumanDimCount;
  for (const auto& p : a.pairs) {
    const auto colon = p.find(':');
    if (colon == std::string::npos) throw UsageError("--pair expects MODEL_A:MODEL_B, got '" + p + "'");
    const std::string ma = p.substr(0, colon), mb = p.substr(colon + 1);
    if (!agg.means.count(ma) || !agg.means.count(mb)) throw DataError("unknown model in pair '" + p + "'");
    for (stats::HumanDim d : stats::kHumanDims) {
      const auto [xa, xb] = stats::paired_samples(agg, ma, mb, d);
      if (xa.size() < 2) throw DataError("pair '" + p + "' shares fewer than two samples");
      auto r = stats::paired_t_cohen_d(xa, xb, alt, variant);
      if (a.bonferroni) stats::apply_bonferroni(r, m);
      auto t = report::test_result_json(r);
      ordered_json entry{{"pair", p}, {"dimension", stats::to_string(d)}};
      for (auto& [k, v] : t.items()) entry[k] = v;
      tests.push_back(std::move(entry));
    }
  }
  j["tests"] = std::move(tests);
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!a.out.empty()) write_file(a.out, text);
  return kExitOk;
}

struct DiversityArgs {
  std::string in;
  std::string out;
};

int cmd_diversity(const DiversityArgs& a, std::ostream& out) {
  auto in = open_in(a.in);
  std::vector<std::string> responses;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '{') {
      try {
        responses.push_back(json::parse(line).at("response").get<std::string>());
      } catch (const json::exception& e) {
        throw DataError(a.in + ": " + e.what());
      }
    } else if (!line.empty()) {
      responses.push_back(line);
    }
  }
  if (responses.empty()) throw DataError(a.in + " has no responses");
  const std::string text = report::diversity_json(diversity_report(responses)).dump(2) + "\n";
  out << text;
  if (!a.out.empty()) write_file(a.out, text);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Opposite-emotion preference datasets and empathetic-response metrics", "polarpref"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs,-j", jobs, "Worker threads for parallel kernels (default: all cores)");

  auto* corpus = app.add_subcommand("corpus", "Corpus ingestion");
  corpus->require_subcommand(1);
  CorpusImportArgs ci;
  auto* corpus_import = corpus->add_subcommand("import", "Import the raw corpus CSVs into a canonical JSONL file");
  corpus_import->add_option("--raw-dir", ci.raw_dir, "Directory with train.csv, valid.csv, test.csv")->required();
  corpus_import->add_option("--out", ci.out, "Canonical corpus output (JSONL)")->required();
  corpus_import->add_option("--keywords", ci.keywords, "Malformed-row keyword rules, one per line");

  auto* prefs = app.add_subcommand("prefs", "Preference datasets");
  prefs->require_subcommand(1);
  PrefsArgs pa;
  auto* prefs_build = prefs->add_subcommand("build", "Build per-epoch preference files");
  prefs_build->add_option("--corpus", pa.corpus, "Canonical corpus file")->required();
  prefs_build->add_option("--split", pa.split, "Split to build from")->capture_default_str();
  prefs_build->add_option("--epochs", pa.epochs, "Number of epochs")->capture_default_str();
  prefs_build->add_option("--seed", pa.seed, "Base seed")->capture_default_str();
  prefs_build->add_option("--table", pa.table, "Opposite-emotion table CSV (default: shipped table)");
  prefs_build->add_option("--out", pa.out, "Output directory")->required();
  auto* sys_opt = prefs_build->add_option("--system", pa.system, "System prompt passed through to every record");
  prefs_build->add_option("--jobs,-j", jobs, "Worker threads");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score generations and write a metric report");
  eval->add_option("--config", ea.config_file, "key = value config file; flags override it");
  eval->add_option("--generations", ea.generations, "JSONL {dialogue_id, response}");
  eval->add_flag("--ground-truth", ea.ground_truth, "Evaluate the test-split reference responses");
  eval->add_option("--corpus", ea.corpus, "Canonical corpus file");
  eval->add_option("--lexicons", ea.lexicons, "Directory holding the two lexicon files");
  eval->add_option("--vad", ea.vad, "NRC-VAD lexicon TSV");
  eval->add_option("--intensity", ea.intensity, "NRC emotion intensity lexicon TSV");
  eval->add_option("--metrics", ea.metrics, "Comma list of nidf,iva,diversity,length");
  eval->add_option("--out", ea.out, "Output directory");
  eval->add_flag("--paper-table", ea.paper_table, "Also print Markdown tables");
  eval->add_option("--prompt-mode", ea.prompt_mode, "all-context, last-user-turn or per-turn-mean");
  eval->add_flag("--include-situation", ea.include_situation, "Treat the situation text as a prompt turn");
  eval->add_option("--nidf-reference", ea.nidf_reference, "train-utterances or train-responses");
  eval->add_option("--nidf-cache", ea.nidf_cache, "NIDF table cache (read if present, written otherwise)");
  eval->add_option("--intensity-combine", ea.intensity_combine, "max or mean");
  eval->add_option("--epitome-gen", ea.epitome_gen, "Epitome scores of the generations (JSONL)");
  eval->add_option("--epitome-gt", ea.epitome_gt, "Epitome scores of the ground truth (JSONL)");
  eval->add_option("--diff-mode", ea.diff_mode, "per-example or dataset-mean");
  eval->add_option("--similarity", ea.similarity, "Similarity F-scores (JSONL)");
  eval->add_option("--model-name", ea.model_name, "Row label in reports");
  eval->add_option("--compare", ea.compare, "Other report.json to test against (repeatable)");
  eval->add_option("--resamples", ea.resamples, "Permutation resamples for --compare");
  eval->add_option("--seed", ea.seed, "Seed for --compare permutation tests");
  eval->add_option("--jobs,-j", jobs, "Worker threads");

  StatsArgs sa;
  auto* st = app.add_subcommand("stats", "Run one significance test");
  st->add_option("--a", sa.a, "First sample (numbers, CSV column or JSONL)");
  st->add_option("--b", sa.b, "Second sample");
  st->add_option("--test", sa.test, "permutation, welch, paired or mcnemar")
      ->required()
      ->check(CLI::IsMember({"permutation", "welch", "paired", "mcnemar"}));
  st->add_option("--resamples", sa.resamples, "Permutation resamples")->capture_default_str();
  st->add_option("--seed", sa.seed, "Permutation seed")->capture_default_str();
  st->add_option("--alternative", sa.alternative, "two-sided, greater or less")->capture_default_str();
  st->add_flag("--exact", sa.exact, "Exact permutation enumeration");
  st->add_option("--bonferroni", sa.bonferroni, "Number of comparisons for Bonferroni correction");
  st->add_option("--d-variant", sa.d_variant, "Cohen's d: pooled, average or paired")->capture_default_str();
  st->add_option("--granularity", sa.granularity, "example or run (recorded in output)")
      ->check(CLI::IsMember({"example", "run"}))
      ->capture_default_str();
  st->add_option("--alpha", sa.alpha, "Level the permutation test must resolve")->capture_default_str();
  st->add_option("--field", sa.field, "JSONL field (dotted path) holding the values");
  st->add_option("--n01", sa.n01, "McNemar discordant count (a wrong, b right)");
  st->add_option("--n10", sa.n10, "McNemar discordant count (a right, b wrong)");
  st->add_option("--exact-threshold", sa.exact_threshold, "McNemar exact-binomial cutoff")->capture_default_str();
  st->add_option("--out", sa.out, "Also write the result JSON here");
  st->add_option("--jobs,-j", jobs, "Worker threads");

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "Render one or more report.json files");
  rep->add_option("--in", ra.in, "report.json (repeatable)")->required();
  rep->add_option("--format", ra.format, "md, csv or plotdata")
      ->check(CLI::IsMember({"md", "csv", "plotdata"}))
      ->capture_default_str();
  rep->add_option("--table", ra.table, "csv table: diversity, features, length or external")->capture_default_str();
  rep->add_option("--out", ra.out, "Output file (default: stdout)");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Recompute report aggregates from per-example rows");
  ver->add_option("--in", va.in, "report.json")->required();
  ver->add_option("--tolerance", va.tolerance, "Relative tolerance")->capture_default_str();

  AnnotationArgs aa;
  auto* ann = app.add_subcommand("annotations", "Aggregate human ratings and run paired tests");
  ann->add_option("--in", aa.in, "Annotation CSV")->required();
  ann->add_option("--pair", aa.pairs, "MODEL_A:MODEL_B to test (repeatable)");
  ann->add_option("--alternative", aa.alternative, "two-sided, greater or less")->capture_default_str();
  ann->add_option("--d-variant", aa.d_variant, "pooled, average or paired")->capture_default_str();
  ann->add_flag("--bonferroni", aa.bonferroni, "Correct for all pair x dimension tests");
  ann->add_option("--out", aa.out, "Also write the JSON here");

  DiversityArgs da;
  auto* div = app.add_subcommand("diversity", "Response-trie diversity of a response file");
  div->add_option("--in", da.in, "Plain text (one response per line) or JSONL with 'response'")->required();
  div->add_option("--out", da.out, "Also write the JSON here");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = &app;
    for (const CLI::App* s = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); s;
         s = s->get_subcommands().empty() ? nullptr : s->get_subcommands().front()) {
      sub = s;
    }
    err << sub->help();
    return kExitUsage;
  }

  set_worker_count(jobs);
  pa.has_system = sys_opt->count() > 0;
  try {
    if (corpus_import->parsed()) return cmd_corpus_import(ci, out);
    if (prefs_build->parsed()) return cmd_prefs_build(pa, out);
    if (eval->parsed()) return cmd_eval(ea, out, err);
    if (st->parsed()) return cmd_stats(sa, out);
    if (rep->parsed()) return cmd_report(ra, out);
    if (ver->parsed()) return cmd_verify(va, out, err);
    if (ann->parsed()) return cmd_annotations(aa, out);
    if (div->parsed()) return cmd_diversity(da, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << "error: no command\n";
  return kExitUsage;
}

}  // namespace polarpref::cli
