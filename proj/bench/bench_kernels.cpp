// Serial reference vs OpenMP path for the four parallel kernels.
#include <benchmark/benchmark.h>

#include <sstream>

#include "polarpref/corpus.hpp"
#include "polarpref/features.hpp"
#include "polarpref/lexicons.hpp"
#include "polarpref/opposites.hpp"
#include "polarpref/preference.hpp"
#include "polarpref/rng.hpp"
#include "polarpref/stats.hpp"
#include "synthetic.hpp"

using namespace polarpref;

namespace {

const Corpus& corpus() {
  static const Corpus c = [] {
    std::istringstream in(testing::synthetic_raw_csv({.dialogues = 20000, .seed = 2}));
    ImportOptions opt;
    opt.split = Split::train;
    return import_raw(in, opt);
  }();
  return c;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_BuildEpoch(benchmark::State& st) {
  const auto& c = corpus();
  const auto table = OppositeTable::standard();
  for (auto _ : st) benchmark::DoNotOptimize(build_epoch(c, Split::train, 0, 42, table, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(c.size()));
}

void BM_BuildNidf(benchmark::State& st) {
  const auto docs = nidf_reference_documents(corpus(), NidfReference::train_utterances);
  for (auto _ : st) benchmark::DoNotOptimize(build_nidf(docs, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(docs.size()));
}

void BM_ScoreExamples(benchmark::State& st) {
  const auto& c = corpus();
  static const NidfTable nidf = build_nidf(nidf_reference_documents(c, NidfReference::train_utterances));
  std::istringstream vad_in(testing::synthetic_vad_tsv()), int_in(testing::synthetic_intensity_tsv());
  const auto vad = load_vad(vad_in);
  const auto inten = load_intensity(int_in);
  std::vector<EvalItem> items;
  for (const auto& d : c.dialogues()) {
    if (auto t = last_response_target(d)) items.push_back(EvalItem{d.id, t->context, t->target.text, std::nullopt});
  }
  ScoringSetup setup;
  setup.nidf = &nidf;
  setup.lex = WordLexicons{&vad, &inten};
  for (auto _ : st) benchmark::DoNotOptimize(score_examples(items, setup, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(items.size()));
}

void BM_PermutationTest(benchmark::State& st) {
  rng::Stream s(5);
  std::vector<double> a(2000), b(2000);
  for (auto& x : a) x = s.unit();
  for (auto& x : b) x = s.unit() + 0.01;
  stats::PermutationOptions opt;
  opt.n_resamples = 10000;
  opt.seed = 1;
  for (auto _ : st) benchmark::DoNotOptimize(stats::permutation_test(a, b, opt, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(opt.n_resamples));
}

}  // namespace

BENCHMARK(BM_BuildEpoch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildNidf)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreExamples)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PermutationTest)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
