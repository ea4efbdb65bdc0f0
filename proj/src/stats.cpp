#include "polarpref/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "polarpref/numeric.hpp"
#include "polarpref/rng.hpp"

namespace polarpref::stats {

std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::two_sided: return "two-sided";
    case Alternative::greater: return "greater";
    case Alternative::less: return "less";
  }
  return "?";
}

Alternative alternative_from_string(std::string_view s) {
  if (s == "two-sided") return Alternative::two_sided;
  if (s == "greater") return Alternative::greater;
  if (s == "less") return Alternative::less;
  throw std::invalid_argument("unknown alternative '" + std::string(s) + "'");
}

namespace {

constexpr double kMinP = std::numeric_limits<double>::min();

double clamp_p(double p) {
  if (std::isnan(p)) return 1.0;
  return std::clamp(p, kMinP, 1.0);
}

void require_nonempty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("both samples must be non-empty");
}

// Scale-aware tolerance for deciding that a resampled statistic ties the
// observed one.
double tie_tolerance(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::fabs(x));
  for (double x : b) scale = std::max(scale, std::fabs(x));
  return 1e-10 * std::max(scale, 1.0);
}

struct Extremeness {
  double observed;
  double tol;
  Alternative alt;

  bool operator()(double stat) const {
    switch (alt) {
      case Alternative::two_sided: return std::fabs(stat) >= std::fabs(observed) - tol;
      case Alternative::greater: return stat >= observed - tol;
      case Alternative::less: return stat <= observed + tol;
    }
    return false;
  }
};

double diff_from_sum(double sum_a, double total, std::size_t na, std::size_t nb) {
  return sum_a / static_cast<double>(na) - (total - sum_a) / static_cast<double>(nb);
}

double t_pvalue(double t, double df, Alternative alt) {
  if (std::isinf(t)) {
    const bool in_tail = alt == Alternative::two_sided || (alt == Alternative::greater) == (t > 0);
    return in_tail ? kMinP : 1.0;
  }
  const boost::math::students_t dist(df);
  switch (alt) {
    case Alternative::two_sided: return clamp_p(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
    case Alternative::greater: return clamp_p(boost::math::cdf(boost::math::complement(dist, t)));
    case Alternative::less: return clamp_p(boost::math::cdf(dist, t));
  }
  return 1.0;
}

std::vector<double> pooled_values(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  return pooled;
}

}  // namespace

TestResult permutation_test(std::span<const double> a, std::span<const double> b, const PermutationOptions& opt,
                            Exec exec) {
  require_nonempty(a, b);
  if (opt.n_resamples < 1) throw std::invalid_argument("n_resamples must be >= 1");

  const std::vector<double> pooled = pooled_values(a, b);
  const std::size_t n = pooled.size();
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const double total = numeric::sum(pooled);
  const double observed = diff_from_sum(numeric::sum(a), total, na, nb);
  const Extremeness extreme{observed, tie_tolerance(a, b), opt.alternative};

  auto resample = [&](std::uint64_t i, std::vector<std::size_t>& idx) -> bool {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng::Stream s(rng::derive(opt.seed, i));
    numeric::CompensatedSum sum_a;
    for (std::size_t k = 0; k < na; ++k) {
      const auto j = k + static_cast<std::size_t>(s.uniform(n - k));
      std::swap(idx[k], idx[j]);
      sum_a.add(pooled[idx[k]]);
    }
    return extreme(diff_from_sum(sum_a.value(), total, na, nb));
  };

  const auto count_n = static_cast<std::int64_t>(opt.n_resamples);
  std::int64_t hits = 0;
  if (exec == Exec::parallel) {
#pragma omp parallel reduction(+ : hits)
    {
      std::vector<std::size_t> idx(n);
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < count_n; ++i) hits += resample(static_cast<std::uint64_t>(i), idx) ? 1 : 0;
    }
  } else {
    std::vector<std::size_t> idx(n);
    for (std::int64_t i = 0; i < count_n; ++i) hits += resample(static_cast<std::uint64_t>(i), idx) ? 1 : 0;
  }

  TestResult r;
  r.method = "permutation";
  r.statistic = observed;
  r.p_value = clamp_p(static_cast<double>(hits + 1) / static_cast<double>(opt.n_resamples + 1));
  r.n_a = na;
  r.n_b = nb;
  r.alternative = opt.alternative;
  r.meta["n_resamples"] = std::to_string(opt.n_resamples);
  r.meta["seed"] = std::to_string(opt.seed);
  r.meta["estimator"] = "(b+1)/(n+1)";
  const double min_p = 1.0 / static_cast<double>(opt.n_resamples + 1);
  if (min_p >= opt.alpha) {
    std::ostringstream w;
    w << "n_resamples=" << opt.n_resamples << " cannot resolve p < " << opt.alpha << " (smallest attainable p is "
      << min_p << ")";
    r.warnings.push_back(w.str());
  }
  return r;
}

TestResult permutation_test_exact(std::span<const double> a, std::span<const double> b, Alternative alternative,
                                  std::uint64_t max_assignments) {
  require_nonempty(a, b);
  const std::vector<double> pooled = pooled_values(a, b);
  const std::size_t n = pooled.size();
  const std::size_t na = a.size();
  const std::size_t nb = b.size();

  // C(n, na) with overflow guard.
  double combos = 1.0;
  for (std::size_t k = 1; k <= na; ++k) combos = combos * static_cast<double>(n - na + k) / static_cast<double>(k);
  if (combos > static_cast<double>(max_assignments)) {
    throw std::invalid_argument("exact permutation test needs " + std::to_string(static_cast<long double>(combos)) +
                                " assignments; use the resampling test");
  }

  const double total = numeric::sum(pooled);
  const double observed = diff_from_sum(numeric::sum(a), total, na, nb);
  const Extremeness extreme{observed, tie_tolerance(a, b), alternative};

  std::vector<std::size_t> pick(na);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  std::uint64_t hits = 0;
  std::uint64_t count = 0;
  while (true) {
    numeric::CompensatedSum s;
    for (auto i : pick) s.add(pooled[i]);
    ++count;
    if (extreme(diff_from_sum(s.value(), total, na, nb))) ++hits;

    std::size_t k = na;
    while (k > 0 && pick[k - 1] == n - na + (k - 1)) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t j = k; j < na; ++j) pick[j] = pick[j - 1] + 1;
  }

  TestResult r;
  r.method = "permutation-exact";
  r.statistic = observed;
  r.p_value = clamp_p(static_cast<double>(hits) / static_cast<double>(count));
  r.n_a = na;
  r.n_b = nb;
  r.alternative = alternative;
  r.meta["assignments"] = std::to_string(count);
  return r;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b, Alternative alternative) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t needs at least two values per sample");
  const double ma = numeric::mean(a);
  const double mb = numeric::mean(b);
  const double qa = numeric::variance(a) / static_cast<double>(a.size());
  const double qb = numeric::variance(b) / static_cast<double>(b.size());

  TestResult r;
  r.method = "welch-t";
  r.n_a = a.size();
  r.n_b = b.size();
  r.alternative = alternative;
  const double se2 = qa + qb;
  if (se2 == 0.0) {
    if (ma == mb) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = t_pvalue(r.statistic, 1.0, alternative);
    }
    r.warnings.push_back("both samples have zero variance");
    return r;
  }
  r.statistic = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 /
                    (qa * qa / static_cast<double>(a.size() - 1) + qb * qb / static_cast<double>(b.size() - 1));
  r.df = df;
  r.p_value = t_pvalue(r.statistic, df, alternative);
  return r;
}

std::string_view to_string(CohenVariant v) {
  switch (v) {
    case CohenVariant::pooled: return "pooled";
    case CohenVariant::average: return "average";
    case CohenVariant::paired: return "paired";
  }
  return "?";
}

CohenVariant cohen_variant_from_string(std::string_view s) {
  if (s == "pooled") return CohenVariant::pooled;
  if (s == "average") return CohenVariant::average;
  if (s == "paired") return CohenVariant::paired;
  throw std::invalid_argument("unknown Cohen's d variant '" + std::string(s) + "'");
}

double cohen_d(std::span<const double> a, std::span<const double> b, CohenVariant v) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("cohen_d needs at least two values per sample");
  const double diff = numeric::mean(a) - numeric::mean(b);
  double s = 0.0;
  switch (v) {
    case CohenVariant::pooled: {
      const double na = static_cast<double>(a.size());
      const double nb = static_cast<double>(b.size());
      s = std::sqrt(((na - 1) * numeric::variance(a) + (nb - 1) * numeric::variance(b)) / (na + nb - 2));
      break;
    }
    case CohenVariant::average:
      s = 0.5 * (std::sqrt(numeric::variance(a)) + std::sqrt(numeric::variance(b)));
      break;
    case CohenVariant::paired: {
      if (a.size() != b.size()) throw std::invalid_argument("paired Cohen's d needs equal lengths");
      std::vector<double> d(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
      s = std::sqrt(numeric::variance(d));
      break;
    }
  }
  if (s == 0.0) {
    if (diff == 0.0) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return diff / s;
}

TestResult paired_t_cohen_d(std::span<const double> a, std::span<const double> b, Alternative alternative,
                            CohenVariant variant) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired test needs equal lengths (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw std::invalid_argument("paired test needs at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double md = numeric::mean(d);
  const double sd = std::sqrt(numeric::variance(d));

  TestResult r;
  r.method = "paired-t";
  r.n_a = n;
  r.n_b = n;
  r.alternative = alternative;
  r.df = static_cast<double>(n - 1);
  if (sd == 0.0) {
    r.statistic = md == 0.0 ? 0.0
                  : md > 0  ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
  } else {
    r.statistic = md / (sd / std::sqrt(static_cast<double>(n)));
  }
  r.p_value = r.statistic == 0.0 && alternative == Alternative::two_sided ? 1.0
                                                                          : t_pvalue(r.statistic, *r.df, alternative);
  r.effect_size = cohen_d(a, b, variant);
  r.effect_size_kind = "cohen_d_" + std::string(to_string(variant));
  return r;
}

TestResult mcnemar(std::uint64_t n01, std::uint64_t n10, std::uint64_t exact_threshold) {
  TestResult r;
  r.n_a = n01;
  r.n_b = n10;
  r.df = 1.0;
  r.meta["n01"] = std::to_string(n01);
  r.meta["n10"] = std::to_string(n10);
  r.meta["exact_threshold"] = std::to_string(exact_threshold);
  const std::uint64_t n = n01 + n10;
  if (n == 0) {
    r.method = "mcnemar";
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.warnings.push_back("no discordant pairs");
    return r;
  }
  const double diff = std::fabs(static_cast<double>(n01) - static_cast<double>(n10));
  r.statistic = (diff - 1.0) * (diff - 1.0) / static_cast<double>(n);

  if (n < exact_threshold) {
    r.method = "mcnemar-exact-binomial";
    const std::uint64_t k = std::min(n01, n10);
    const double log_half_n = static_cast<double>(n) * std::log(0.5);
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
    numeric::CompensatedSum tail;
    for (std::uint64_t i = 0; i <= k; ++i) {
      const double log_c = lg_n1 - std::lgamma(static_cast<double>(i) + 1.0) -
                           std::lgamma(static_cast<double>(n - i) + 1.0);
      tail.add(std::exp(log_c + log_half_n));
    }
    r.p_value = clamp_p(2.0 * tail.value());
  } else {
    r.method = "mcnemar-chi2-cc";
    const boost::math::chi_squared dist(1.0);
    r.p_value = clamp_p(boost::math::cdf(boost::math::complement(dist, r.statistic)));
  }
  return r;
}

std::pair<std::uint64_t, std::uint64_t> discordant_counts(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("McNemar needs paired vectors of equal length");
  std::uint64_t n01 = 0, n10 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool ra = a[i] != 0.0;
    const bool rb = b[i] != 0.0;
    if (!ra && rb) ++n01;
    if (ra && !rb) ++n10;
  }
  return {n01, n10};
}

void apply_bonferroni(TestResult& r, std::size_t m) {
  if (m <= 1) return;
  r.meta["p_uncorrected"] = std::to_string(r.p_value);
  r.meta["bonferroni_m"] = std::to_string(m);
  r.p_value = clamp_p(r.p_value * static_cast<double>(m));
}

// Human evaluation ---------------------------------------------------------

std::string_view to_string(HumanDim d) {
  switch (d) {
    case HumanDim::emotion_understanding: return "emotion_understanding";
    case HumanDim::situational_appropriateness: return "situational_appropriateness";
    case HumanDim::contextual_naturalness: return "contextual_naturalness";
    case HumanDim::conversational_engagingness: return "conversational_engagingness";
  }
  return "?";
}

HumanDim human_dim_from_string(std::string_view s) {
  for (HumanDim d : kHumanDims) {
    if (to_string(d) == s) return d;
  }
  throw std::invalid_argument("unknown human-evaluation dimension '" + std::string(s) + "'");
}

namespace {

std::string join_cells(const std::vector<std::string>& cells) {
  std::string msg = "missing annotation cells:";
  for (std::size_t i = 0; i < cells.size() && i < 20; ++i) msg += " " + cells[i];
  if (cells.size() > 20) msg += " ... (" + std::to_string(cells.size()) + " total)";
  return msg;
}

}  // namespace

MissingCellsError::MissingCellsError(std::vector<std::string> cells)
    : std::runtime_error(join_cells(cells)), cells_(std::move(cells)) {}

HumanEvalAggregate human_eval_aggregate(std::span<const AnnotationRecord> records) {
  struct Cell {
    numeric::CompensatedSum sum;
    std::size_t n = 0;
  };
  // model -> sample -> dim -> ratings
  std::map<std::string, std::map<std::string, std::array<Cell, kHumanDimCount>>> cells;
  std::map<std::string, std::map<std::string, std::pair<std::size_t, std::size_t>>> consistent;  // (true, total)

  for (const auto& rec : records) {
    if (!(rec.rating >= 0.0 && rec.rating <= 100.0)) {
      throw std::invalid_argument("rating outside [0,100] for sample " + rec.sample_id);
    }
    auto& cell = cells[rec.model_id][rec.sample_id][static_cast<std::size_t>(rec.dimension)];
    cell.sum.add(rec.rating);
    ++cell.n;
    auto& c = consistent[rec.model_id][rec.sample_id];
    c.first += rec.consistency_fluency ? 1 : 0;
    ++c.second;
  }

  std::vector<std::string> missing;
  HumanEvalAggregate agg;
  for (const auto& [model, samples] : cells) {
    auto& per_sample = agg.per_sample[model];
    for (const auto& [sample, dims] : samples) {
      for (HumanDim d : kHumanDims) {
        const auto k = static_cast<std::size_t>(d);
        if (dims[k].n == 0) {
          missing.push_back(sample + "/" + model + "/" + std::string(to_string(d)));
          continue;
        }
        per_sample[k][sample] = dims[k].sum.value() / static_cast<double>(dims[k].n);
      }
    }
  }
  if (!missing.empty()) throw MissingCellsError(std::move(missing));

  for (const auto& [model, dims] : agg.per_sample) {
    auto& means = agg.means[model];
    for (std::size_t k = 0; k < kHumanDimCount; ++k) {
      numeric::CompensatedSum s;
      for (const auto& [_, v] : dims[k]) s.add(v);
      means[k] = s.value() / static_cast<double>(dims[k].size());
    }
    numeric::CompensatedSum rate;
    const auto& per = consistent.at(model);
    for (const auto& [_, c] : per) rate.add(static_cast<double>(c.first) / static_cast<double>(c.second));
    agg.consistency_rate[model] = rate.value() / static_cast<double>(per.size());
  }
  return agg;
}

std::pair<std::vector<double>, std::vector<double>> paired_samples(const HumanEvalAggregate& agg,
                                                                   const std::string& model_a,
                                                                   const std::string& model_b, HumanDim d) {
  const auto& a = agg.per_sample.at(model_a)[static_cast<std::size_t>(d)];
  const auto& b = agg.per_sample.at(model_b)[static_cast<std::size_t>(d)];
  std::pair<std::vector<double>, std::vector<double>> out;
  for (const auto& [sample, v] : a) {
    auto it = b.find(sample);
    if (it == b.end()) continue;
    out.first.push_back(v);
    out.second.push_back(it->second);
  }
  return out;
}

std::vector<AnnotationRecord> read_annotations(std::istream& in) {
  std::vector<AnnotationRecord> out;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("annotation file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) header.push_back(f);
  }
  auto col = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument(std::string("annotation header lacks column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_sample = col("sample_id"), c_model = col("model_id"), c_ann = col("annotator_id"),
                    c_dim = col("dimension"), c_rating = col("rating"), c_cf = col("consistency_fluency");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    if (f.size() != header.size()) {
      throw std::invalid_argument("annotation line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields");
    }
    AnnotationRecord r;
    r.sample_id = f[c_sample];
    r.model_id = f[c_model];
    r.annotator_id = f[c_ann];
    r.dimension = human_dim_from_string(f[c_dim]);
    try {
      r.rating = std::stod(f[c_rating]);
    } catch (const std::exception&) {
      throw std::invalid_argument("annotation line " + std::to_string(line_no) + ": bad rating '" + f[c_rating] + "'");
    }
    const auto& cf = f[c_cf];
    r.consistency_fluency = cf == "1" || cf == "true" || cf == "True" || cf == "yes";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace polarpref::stats
