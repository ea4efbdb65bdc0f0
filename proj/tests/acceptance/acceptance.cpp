// One PASS/FAIL line per acceptance criterion.
//
//   polarpref_acceptance               all criteria; missing data is a FAIL
//   polarpref_acceptance --offline     criteria that need no external data
//                                      (6 on a synthetic proxy corpus)
//   polarpref_acceptance --corpus-only criteria on the real corpus; exits 77
//                                      when the corpus is not available
//
// The corpus directory comes from --ed-dir or EMPATHETIC_DIALOGUES_DIR, the
// lexicon directory from --lexicons or POLARPREF_LEXICON_DIR.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "polarpref/config.hpp"
#include "polarpref/corpus.hpp"
#include "polarpref/diversity.hpp"
#include "polarpref/external.hpp"
#include "polarpref/features.hpp"
#include "polarpref/lexicons.hpp"
#include "polarpref/opposites.hpp"
#include "polarpref/preference.hpp"
#include "polarpref/rng.hpp"
#include "polarpref/stats.hpp"
#include "polarpref/text.hpp"
#include "synthetic.hpp"

using namespace polarpref;

namespace {

constexpr int kSkip = 77;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool within(double x, double target, double tol) { return std::fabs(x - target) <= tol; }

struct Data {
  std::optional<Corpus> corpus;
  std::string corpus_problem;
  std::optional<VadLexicon> vad;
  std::optional<IntensityLexicon> intensity;
  std::string lexicon_problem;
};

Data load_data(const std::string& ed_dir, const std::string& lex_dir) {
  Data d;
  if (ed_dir.empty()) {
    d.corpus_problem = "corpus not available (set EMPATHETIC_DIALOGUES_DIR or --ed-dir)";
  } else {
    try {
      d.corpus = import_raw_dir(ed_dir, ImportOptions{});
    } catch (const std::exception& e) {
      d.corpus_problem = std::string("corpus import failed: ") + e.what();
    }
  }
  if (lex_dir.empty()) {
    d.lexicon_problem = "lexicons not available (set " + std::string(kLexiconDirEnv) + " or --lexicons)";
  } else {
    RunConfig c;
    apply_lexicon_dir(c, lex_dir);
    try {
      d.vad = load_vad_file(c.vad);
      d.intensity = load_intensity_file(c.intensity);
    } catch (const std::exception& e) {
      d.lexicon_problem = std::string("lexicon load failed: ") + e.what();
    }
  }
  return d;
}

std::vector<EvalItem> ground_truth_items(const Corpus& c) {
  std::vector<EvalItem> items;
  for (auto i : c.split_indices(Split::test)) {
    const auto& d = c.dialogues()[i];
    if (auto t = last_response_target(d)) items.push_back(EvalItem{d.id, t->context, t->target.text, std::nullopt});
  }
  return items;
}

std::vector<std::string> responses_of(const std::vector<EvalItem>& items) {
  std::vector<std::string> out;
  for (const auto& it : items) out.push_back(it.response);
  return out;
}

// 1 -----------------------------------------------------------------------
Outcome corpus_scale(const Corpus& c) {
  const double n_test = static_cast<double>(c.split_indices(Split::test).size());
  const double frac = c.filter_report().filtered_fraction();
  const bool ok = within(n_test, 2540.0, 25.4) && frac < 0.01;
  return {ok, fmt("test dialogues %.0f (target 2540 +/- 1%%), filtered fraction %.3f%% (< 1%%)", n_test, frac * 100)};
}

// 2 -----------------------------------------------------------------------
Outcome gt_length(const Corpus& c) {
  const auto items = ground_truth_items(c);
  if (items.empty()) return {false, "no test responses"};
  const auto s = length_stats(responses_of(items));
  return {within(s.mean_chars, 65.0, 7.0), fmt("mean chars %.2f over %.0f responses (target 65 +/- 7)", s.mean_chars,
                                               static_cast<double>(s.n))};
}

// 3 -----------------------------------------------------------------------
Outcome human_diversity(const Corpus& c) {
  const auto items = ground_truth_items(c);
  if (items.empty()) return {false, "no test responses"};
  const auto r = diversity_report(responses_of(items));
  const double t = static_cast<double>(r.templates), u = static_cast<double>(r.unique_start_words);
  const bool ok = within(t, 2526.0, 25.26) && within(u, 370.0, 0.15 * 370.0);
  return {ok, fmt("templates %.0f (2526 +/- 1%%), unique start words %.0f (370 +/- 15%%); ", t, u) +
                  "reported only: compression " + r.compression_cell() + ", span nodes " + r.span_cell()};
}

// 4 -----------------------------------------------------------------------
Outcome human_specificity(const Corpus& c) {
  const auto items = ground_truth_items(c);
  const auto docs = nidf_reference_documents(c, NidfReference::train_utterances);
  if (items.empty() || docs.empty()) return {false, "missing train or test split"};
  const auto table = build_nidf(docs);
  ScoringSetup setup;
  setup.nidf = &table;
  const auto scores = score_examples(items, setup);
  const auto agg = aggregate_feature_report(scores).specificity;
  if (!agg.mean) return {false, "no defined specificity"};
  return {within(*agg.mean, 0.30, 0.05),
          fmt("mean NIDF %.4f (sd %.4f) under train-utterance reference (target 0.30 +/- 0.05)", *agg.mean,
              agg.sd.value_or(NAN))};
}

// 5 -----------------------------------------------------------------------
Outcome human_iva(const Corpus& c, const VadLexicon& vad, const IntensityLexicon& inten) {
  const auto items = ground_truth_items(c);
  if (items.empty()) return {false, "no test responses"};
  const double target[3] = {0.28, 0.14, 0.18};
  std::string detail;
  bool default_ok = false, any_ok = false;
  std::string passing_mode;
  for (PromptMode m : {PromptMode::all_context, PromptMode::last_user_turn, PromptMode::per_turn_mean}) {
    ScoringSetup setup;
    setup.lex = WordLexicons{&vad, &inten};
    setup.mode = m;
    const auto f = aggregate_feature_report(score_examples(items, setup));
    bool ok = true;
    double v[3];
    for (std::size_t i = 0; i < 3; ++i) {
      v[i] = f.distance[i].mean.value_or(NAN);
      ok = ok && within(v[i], target[i], 0.06);
    }
    if (!detail.empty()) detail += "; ";
    detail += std::string(to_string(m)) + fmt(" (I, V, A) = (%.3f, %.3f, %.3f)", v[0], v[1], v[2]) +
              (ok ? " in tolerance" : " out of tolerance");
    if (m == PromptMode::all_context) default_ok = ok;
    if (ok && !any_ok) passing_mode = std::string(to_string(m));
    any_ok = any_ok || ok;
  }
  if (!default_ok && any_ok) detail += "; default mode outside tolerance, '" + passing_mode + "' within";
  return {any_ok, detail + " (target (0.28, 0.14, 0.18) +/- 0.06)"};
}

// 6 -----------------------------------------------------------------------
Outcome preference_properties(const Corpus& c, const char* label) {
  const auto& table = OppositeTable::standard();
  const std::uint64_t seed = 20240601;
  const auto e0 = build_epoch(c, Split::train, 0, seed, table);
  const auto e1 = build_epoch(c, Split::train, 1, seed, table);
  const auto e0_again = build_epoch(c, Split::train, 0, seed, table, Exec::serial);
  if (e0.examples.empty()) return {false, "no examples"};

  std::size_t violations = 0;
  for (const auto& ex : e0.examples) {
    const Dialogue* src = c.find(ex.dialogue_id);
    const Dialogue* rej = c.find(ex.rejected_source_id);
    const bool ok = src && rej && src->split == Split::train && rej->split == Split::train &&
                    rej->emotion == table.opposite_of(src->emotion) && ex.opposite_emotion == rej->emotion &&
                    last_response_target(*src) && ex.chosen == last_response_target(*src)->target.text &&
                    last_response_target(*rej) && ex.rejected == last_response_target(*rej)->target.text;
    violations += ok ? 0 : 1;
  }

  std::ostringstream a, b;
  serialize_preferences(e0.examples, a);
  serialize_preferences(e0_again.examples, b);
  const bool identical = a.str() == b.str();

  const auto groups = group_by_emotion(c, Split::train);
  std::size_t eligible = 0, differ = 0;
  for (std::size_t k = 0; k < e0.examples.size() && k < e1.examples.size(); ++k) {
    const auto& x = e0.examples[k];
    if (groups[index_of(x.opposite_emotion)].size() < 2) continue;
    ++eligible;
    differ += x.rejected != e1.examples[k].rejected ? 1 : 0;
  }
  const double share = eligible ? static_cast<double>(differ) / static_cast<double>(eligible) : 0.0;
  const bool ok = violations == 0 && identical && eligible > 0 && share > 0.5;
  return {ok, std::string(label) + ": " + std::to_string(e0.examples.size()) + " examples, " +
                  std::to_string(violations) + " invariant violations, rebuild " +
                  (identical ? "byte-identical" : "DIFFERENT") +
                  fmt(", rejected differs between epochs on %.1f%% of eligible examples", share * 100)};
}

// 7 -----------------------------------------------------------------------
Outcome opposite_table() {
  // Expected rows, written out independently of data/opposites.csv.
  static const char* rows[32][3] = {
      {"afraid", "angry", "wheel"},           {"angry", "afraid", "wheel"},
      {"sad", "joyful", "wheel"},             {"grateful", "disgusted", "wheel"},
      {"surprised", "anticipating", "wheel"}, {"trusting", "disgusted", "wheel"},
      {"disgusted", "trusting", "wheel"},     {"anticipating", "surprised", "wheel"},
      {"content", "anxious", "wheel"},        {"apprehensive", "annoyed", "wheel"},
      {"joyful", "sad", "wheel"},             {"proud", "ashamed", "dyads"},
      {"prepared", "anxious", "dyads"},       {"ashamed", "proud", "dyads"},
      {"guilty", "proud", "dyads"},           {"nostalgic", "hopeful", "dyads"},
      {"anxious", "content", "dyads"},        {"hopeful", "nostalgic", "dyads"},
      {"sentimental", "apprehensive", "authors"}, {"jealous", "faithful", "authors"},
      {"embarrassed", "confident", "authors"},    {"excited", "devastated", "authors"},
      {"annoyed", "apprehensive", "authors"},     {"lonely", "caring", "authors"},
      {"faithful", "jealous", "authors"},         {"terrified", "furious", "authors"},
      {"confident", "embarrassed", "authors"},    {"furious", "terrified", "authors"},
      {"disappointed", "impressed", "authors"},   {"caring", "lonely", "authors"},
      {"impressed", "disappointed", "authors"},   {"devastated", "excited", "authors"},
  };
  const auto& t = OppositeTable::standard();
  std::size_t matched = 0;
  std::vector<std::string> wrong;
  for (const auto& r : rows) {
    const auto e = parse_emotion(r[0]);
    if (!e) {
      wrong.emplace_back(r[0]);
      continue;
    }
    const auto& entry = t.entry(*e);
    if (to_string(entry.opposite) == r[1] && to_string(entry.source) == r[2]) ++matched;
    else wrong.emplace_back(r[0]);
  }
  std::ifstream csv(POLARPREF_DATA_DIR "/opposites.csv");
  const bool file_matches = csv && read_opposite_table(csv) == t;
  const bool spots = t.opposite_of(Emotion::afraid) == Emotion::angry &&
                     t.opposite_of(Emotion::proud) == Emotion::ashamed &&
                     t.opposite_of(Emotion::lonely) == Emotion::caring &&
                     t.opposite_of(Emotion::excited) == Emotion::devastated;
  std::string detail = std::to_string(matched) + "/32 rows match (label, opposite, source)";
  if (!wrong.empty()) {
    detail += "; mismatched:";
    for (const auto& w : wrong) detail += " " + w;
  }
  detail += std::string(", spot checks ") + (spots ? "ok" : "FAILED") + ", shipped CSV " +
            (file_matches ? "identical" : "DIFFERENT");
  return {matched == 32 && spots && file_matches, detail};
}

// 8 -----------------------------------------------------------------------
double mcnemar_closed_form(unsigned n01, unsigned n10) {
  const unsigned n = n01 + n10, k = std::min(n01, n10);
  long double binom = 1.0L, tail = 0.0L;
  for (unsigned i = 0; i <= k; ++i) {
    if (i > 0) binom = binom * static_cast<long double>(n - i + 1) / static_cast<long double>(i);
    tail += binom;
  }
  return static_cast<double>(std::min(1.0L, 2.0L * tail / std::ldexp(1.0L, static_cast<int>(n))));
}

Outcome statistics_oracles() {
  std::vector<std::string> failures;
  const std::size_t resamples = 20000;
  const double perm_tol = 2.0 / std::sqrt(static_cast<double>(resamples));
  std::size_t fixtures = 0;
  double worst = 0.0;
  rng::Stream s(8);
  for (std::size_t na = 1; na <= 7; ++na) {
    for (std::size_t nb = 1; na + nb <= 8; ++nb) {
      for (int variant = 0; variant < 2; ++variant) {
        std::vector<double> a(na), b(nb);
        for (auto& x : a) x = variant == 0 ? static_cast<double>(s.uniform(4)) : s.unit() * 3.0;
        for (auto& x : b) x = variant == 0 ? static_cast<double>(s.uniform(4)) : s.unit() * 3.0 - 0.5;
        for (auto [alt, tail] : {std::pair{stats::Alternative::two_sided, 0}, std::pair{stats::Alternative::greater, 1},
                                 std::pair{stats::Alternative::less, -1}}) {
          ++fixtures;
          const double exact = stats::permutation_test_exact(a, b, alt).p_value;
          const double brute = testing::brute_force_permutation_p(a, b, tail);
          stats::PermutationOptions opt;
          opt.n_resamples = resamples;
          opt.seed = fixtures;
          opt.alternative = alt;
          const double sampled = stats::permutation_test(a, b, opt).p_value;
          worst = std::max(worst, std::fabs(sampled - exact));
          if (std::fabs(exact - brute) > 1e-12 || std::fabs(sampled - exact) > perm_tol) {
            failures.push_back("permutation fixture " + std::to_string(fixtures));
          }
        }
      }
    }
  }

  const std::vector<double> wa = {1, 2, 3, 4, 5}, wb = {2, 3, 4, 5, 6};
  const auto w = stats::welch_t(wa, wb);
  const bool welch_ok = within(w.statistic, -1.0, 1e-3) && w.df && within(*w.df, 8.0, 1e-3) &&
                        within(w.p_value, 0.3466, 1e-3);
  if (!welch_ok) failures.emplace_back("welch");

  double mc_worst = 0.0;
  for (unsigned n01 = 0; n01 <= 24; ++n01) {
    for (unsigned n10 = 0; n01 + n10 <= 24; ++n10) {
      if (n01 + n10 == 0) continue;
      const double diff = std::fabs(stats::mcnemar(n01, n10).p_value - mcnemar_closed_form(n01, n10));
      mc_worst = std::max(mc_worst, diff);
    }
  }
  if (mc_worst > 1e-12) failures.emplace_back("mcnemar");

  double d_worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(12), b(12);
    for (auto& x : a) x = s.unit() * 2.0;
    for (auto& x : b) x = s.unit() * 2.0 + 0.3;
    for (double scale : {1e-3, 0.5, 7.25, 1e4}) {
      std::vector<double> sa = a, sb = b;
      for (auto& x : sa) x *= scale;
      for (auto& x : sb) x *= scale;
      for (auto v : {stats::CohenVariant::pooled, stats::CohenVariant::average, stats::CohenVariant::paired}) {
        d_worst = std::max(d_worst, std::fabs(stats::cohen_d(sa, sb, v) - stats::cohen_d(a, b, v)));
      }
    }
  }
  if (d_worst > 1e-12) failures.emplace_back("cohen_d");

  std::string detail = std::to_string(fixtures) + " permutation fixtures" +
                       fmt(" (max |resampled - exact| %.4f, tol %.4f)", worst, perm_tol) +
                       fmt("; Welch t %.4f df %.4f p %.4f", w.statistic, w.df.value_or(NAN), w.p_value) +
                       fmt("; McNemar max err %.2e; d scale max err %.2e", mc_worst, d_worst);
  if (!failures.empty()) {
    detail += "; failed:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

// 9 -----------------------------------------------------------------------
using Seq = std::vector<std::string>;

Outcome trie_oracle() {
  const std::vector<std::string> hand = {"i am sorry", "i am glad", "great job"};
  const auto r = diversity_report(hand);
  const bool hand_ok = r.total_nodes_unfolded == 6 && r.folded_nodes_total == 4 && r.span_nodes_folded == 2 &&
                       r.compression_pct && std::fabs(*r.compression_pct - 100.0 / 3.0) < 1e-9 &&
                       r.compression_cell() == "33.33%";

  const char* vocab[] = {"a", "b", "c", "d", "e"};
  rng::Stream s(9);
  std::size_t preserved = 0, idempotent = 0;
  const std::size_t sets = 1000;
  for (std::size_t k = 0; k < sets; ++k) {
    std::vector<Seq> seqs(1 + s.uniform(25));
    for (auto& q : seqs) {
      q.resize(1 + s.uniform(6));
      for (auto& w : q) w = vocab[s.uniform(1 + k % 5)];
    }
    const auto t = build_trie(seqs);
    const auto f = fold(t);
    auto want = seqs, got_t = t.sequences(), got_f = f.sequences();
    std::sort(want.begin(), want.end());
    std::sort(got_t.begin(), got_t.end());
    std::sort(got_f.begin(), got_f.end());
    preserved += (got_t == want && got_f == want) ? 1 : 0;
    idempotent += fold(f) == f ? 1 : 0;
  }
  const bool ok = hand_ok && preserved == sets && idempotent == sets;
  return {ok, std::string("hand example ") + (hand_ok ? "exact" : "MISMATCH") + fmt(" (%.0f unfolded, %.0f folded, %.0f span, ", static_cast<double>(r.total_nodes_unfolded), static_cast<double>(r.folded_nodes_total), static_cast<double>(r.span_nodes_folded)) +
                  r.compression_cell() + "); language preserved on " + std::to_string(preserved) + "/" +
                  std::to_string(sets) + ", fold idempotent on " + std::to_string(idempotent) + "/" +
                  std::to_string(sets) + " random sets"};
}

// 10 ----------------------------------------------------------------------
Outcome diff_epitome_aggregation() {
  const std::vector<EpitomeRecord> x = {{"a", 2, 1, 0}, {"b", 0.5, 1.5, 2}, {"c", 1, 0, 1}};
  bool identity = true;
  for (DiffMode m : {DiffMode::per_example, DiffMode::dataset_mean}) {
    const auto d = diff_epitome(x, x, m);
    identity = identity && d.er == 0.0 && d.ex == 0.0 && d.ip == 0.0 && d.mean_of_three == 0.0;
  }
  const std::vector<EpitomeRecord> gen = {{"a", 2, 0, 0}, {"b", 0, 0, 0}};
  const std::vector<EpitomeRecord> gt = {{"a", 1, 0, 0}, {"b", 1, 0, 0}};
  const double pe = diff_epitome(gen, gt, DiffMode::per_example).er;
  const double dm = diff_epitome(gen, gt, DiffMode::dataset_mean).er;
  const double m3 = mean_of_three(0.588, 0.720, 0.796);
  const bool ok = identity && pe == 1.0 && dm == 0.0 && within(m3, 0.701, 0.0005);
  return {ok, std::string("identity ") + (identity ? "0" : "NONZERO") +
                  fmt(", mode gap per-example %.1f vs dataset-mean %.1f, mean of (0.588, 0.720, 0.796) = %.4f", pe, dm,
                      m3)};
}

// 11 ----------------------------------------------------------------------
Outcome scope_statement() {
  std::ifstream in(POLARPREF_SOURCE_DIR "/README.md");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string readme = buf.str();
  const char* required[] = {"Not reproducible at desk scale", "diff-Epitome", "MMLU", "training curves",
                            "human-evaluation ratings"};
  std::vector<std::string> missing;
  for (const char* r : required) {
    if (readme.find(r) == std::string::npos) missing.emplace_back(r);
  }
  if (missing.empty()) {
    return {true,
            "stated in README: model diff-Epitome values, MMLU/Open-LLM scores, training curves and "
            "human-evaluation ratings need GPU training, external classifiers or annotators; obligations are "
            "criteria 6-10"};
  }
  std::string d = "README lacks the scope statement:";
  for (const auto& m : missing) d += " '" + m + "'";
  return {false, d};
}

struct Runner {
  bool all_pass = true;
  void report(int id, const char* title, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << o.detail << std::endl;
    all_pass = all_pass && o.pass;
  }
  void report(int id, const char* title, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    report(id, title, o);
  }
};

std::string env_or(const char* name, const std::string& fallback) {
  if (!fallback.empty()) return fallback;
  const char* v = std::getenv(name);
  return v ? v : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  bool offline = false, corpus_only = false;
  std::string ed_dir, lex_dir;
  app.add_flag("--offline", offline, "Only criteria that need no external data");
  app.add_flag("--corpus-only", corpus_only, "Only criteria on the real corpus (exit 77 when it is missing)");
  app.add_option("--ed-dir", ed_dir, "Directory with the raw corpus train/valid/test CSVs");
  app.add_option("--lexicons", lex_dir, "Directory with the NRC lexicon files");
  CLI11_PARSE(app, argc, argv);
  if (offline && corpus_only) {
    std::cerr << "--offline and --corpus-only are exclusive\n";
    return 2;
  }
  ed_dir = env_or("EMPATHETIC_DIALOGUES_DIR", ed_dir);
  lex_dir = env_or(kLexiconDirEnv, lex_dir);

  Runner run;
  if (!offline) {
    const Data data = load_data(ed_dir, lex_dir);
    if (corpus_only && !data.corpus) {
      std::cout << "SKIP corpus criteria 1-6: " << data.corpus_problem << std::endl;
      return kSkip;
    }
    auto with_corpus = [&](std::function<Outcome(const Corpus&)> f) -> std::function<Outcome()> {
      return [&data, f] { return data.corpus ? f(*data.corpus) : Outcome{false, data.corpus_problem}; };
    };
    run.report(1, "corpus scale", with_corpus(corpus_scale));
    run.report(2, "ground-truth length", with_corpus(gt_length));
    run.report(3, "human diversity row", with_corpus(human_diversity));
    run.report(4, "human specificity", with_corpus(human_specificity));
    run.report(5, "human IVA", with_corpus([&data](const Corpus& c) {
                 if (!data.vad || !data.intensity) return Outcome{false, data.lexicon_problem};
                 return human_iva(c, *data.vad, *data.intensity);
               }));
    run.report(6, "preference dataset properties",
               with_corpus([](const Corpus& c) { return preference_properties(c, "full train split"); }));
  } else {
    run.report(6, "preference dataset properties", [] {
      std::istringstream in(testing::synthetic_raw_csv({.dialogues = 20000, .seed = 6}));
      const Corpus c = import_raw(in, ImportOptions{});
      return preference_properties(c, "synthetic proxy corpus (20000 dialogues)");
    });
  }
  if (!corpus_only) {
    run.report(7, "opposite-table conformance", opposite_table);
    run.report(8, "statistics oracles", statistics_oracles);
    run.report(9, "trie oracle", trie_oracle);
    run.report(10, "diff-Epitome aggregation", diff_epitome_aggregation);
    run.report(11, "scope: not reproducible at desk scale", scope_statement);
  }
  return run.all_pass ? 0 : 1;
}
