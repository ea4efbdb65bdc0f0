#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polarpref/exec.hpp"

namespace polarpref::stats {

enum class Alternative { two_sided, greater, less };
std::string_view to_string(Alternative a);
Alternative alternative_from_string(std::string_view s);

/// Result of one significance test. p_value is always in (0, 1].
struct TestResult {
  std::string method;
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> df;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::optional<double> effect_size;
  std::string effect_size_kind;
  Alternative alternative = Alternative::two_sided;
  std::map<std::string, std::string> meta;
  std::vector<std::string> warnings;
};

struct PermutationOptions {
  std::size_t n_resamples = 10000;
  std::uint64_t seed = 0;
  Alternative alternative = Alternative::two_sided;
  /// Significance level the caller wants to resolve; a warning is attached
  /// when 1/(n_resamples+1) cannot get below it.
  double alpha = 0.05;
};

/// Monte-Carlo permutation test of mean(a) - mean(b) with the (b+1)/(n+1)
/// estimator. Resample i draws from its own stream keyed by (seed, i), so
/// the result does not depend on how resamples are split across threads.
TestResult permutation_test(std::span<const double> a, std::span<const double> b, const PermutationOptions& opt,
                            Exec exec = Exec::parallel);

/// Exact permutation p over all C(n_a+n_b, n_a) relabelings. Throws
/// std::invalid_argument when that count exceeds max_assignments.
TestResult permutation_test_exact(std::span<const double> a, std::span<const double> b,
                                  Alternative alternative = Alternative::two_sided,
                                  std::uint64_t max_assignments = 20'000'000);

/// Welch's unequal-variance t test with Welch-Satterthwaite df.
TestResult welch_t(std::span<const double> a, std::span<const double> b,
                   Alternative alternative = Alternative::two_sided);

enum class CohenVariant { pooled, average, paired };
std::string_view to_string(CohenVariant v);
CohenVariant cohen_variant_from_string(std::string_view s);

/// Cohen's d: (mean(a) - mean(b)) / s. `pooled` uses the pooled SD,
/// `average` the mean of the two SDs, `paired` the SD of the differences.
double cohen_d(std::span<const double> a, std::span<const double> b, CohenVariant v = CohenVariant::pooled);

/// Paired t test (df = n-1) with Cohen's d as effect size.
TestResult paired_t_cohen_d(std::span<const double> a, std::span<const double> b,
                            Alternative alternative = Alternative::two_sided,
                            CohenVariant variant = CohenVariant::pooled);

/// McNemar's test on discordant counts. Below exact_threshold discordant
/// pairs the two-sided exact binomial (p=0.5) is used, otherwise chi-square
/// with continuity correction on 1 df. `statistic` is the corrected
/// chi-square value in both cases.
TestResult mcnemar(std::uint64_t n01, std::uint64_t n10, std::uint64_t exact_threshold = 25);

/// Discordant counts from paired 0/1 correctness vectors: n01 counts
/// (a wrong, b right), n10 counts (a right, b wrong).
std::pair<std::uint64_t, std::uint64_t> discordant_counts(std::span<const double> a, std::span<const double> b);

/// Multiplies p by m (capped at 1) and records it in meta.
void apply_bonferroni(TestResult& r, std::size_t m);

// Human evaluation ---------------------------------------------------------

enum class HumanDim { emotion_understanding, situational_appropriateness, contextual_naturalness, conversational_engagingness };
inline constexpr std::size_t kHumanDimCount = 4;
inline constexpr std::array<HumanDim, kHumanDimCount> kHumanDims = {
    HumanDim::emotion_understanding, HumanDim::situational_appropriateness, HumanDim::contextual_naturalness,
    HumanDim::conversational_engagingness};
std::string_view to_string(HumanDim d);
HumanDim human_dim_from_string(std::string_view s);

struct AnnotationRecord {
  std::string sample_id;
  std::string model_id;
  std::string annotator_id;
  HumanDim dimension = HumanDim::emotion_understanding;
  double rating = 0.0;  ///< [0, 100]
  bool consistency_fluency = false;
};

struct HumanEvalAggregate {
  /// model -> per-dimension mean of per-sample means.
  std::map<std::string, std::array<double, kHumanDimCount>> means;
  /// model -> mean over samples of the per-sample share of "consistent & fluent".
  std::map<std::string, double> consistency_rate;
  /// model -> dimension -> sample -> mean over that sample's annotators.
  std::map<std::string, std::array<std::map<std::string, double>, kHumanDimCount>> per_sample;
};

class MissingCellsError : public std::runtime_error {
 public:
  explicit MissingCellsError(std::vector<std::string> cells);
  const std::vector<std::string>& cells() const { return cells_; }

 private:
  std::vector<std::string> cells_;
};

/// Two-stage average: annotators within a sample, then samples within a
/// (model, dimension). Every (sample, model) pair present must have all four
/// dimensions rated.
HumanEvalAggregate human_eval_aggregate(std::span<const AnnotationRecord> records);

/// Per-sample means of two models on one dimension, over their shared
/// samples in sample-id order; ready for paired_t_cohen_d.
std::pair<std::vector<double>, std::vector<double>> paired_samples(const HumanEvalAggregate& agg,
                                                                   const std::string& model_a,
                                                                   const std::string& model_b, HumanDim d);

/// CSV with header sample_id,model_id,annotator_id,dimension,rating,consistency_fluency.
std::vector<AnnotationRecord> read_annotations(std::istream& in);

}  // namespace polarpref::stats
