#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarpref/config.hpp"
#include "polarpref/diversity.hpp"
#include "polarpref/external.hpp"
#include "polarpref/features.hpp"
#include "polarpref/stats.hpp"

namespace polarpref::report {

inline constexpr std::string_view kSchema = "polarpref.report/1";
inline constexpr std::string_view kPerExampleFile = "per_example.jsonl";

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ordered_json = nlohmann::ordered_json;

ordered_json example_json(const ExampleScore& s);
ExampleScore example_from_json(const nlohmann::json& j);
std::vector<ExampleScore> read_examples(std::istream& in);

ordered_json aggregate_json(const AggregateStat& a);
ordered_json length_json(const LengthStats& s);
ordered_json diversity_json(const DiversityReport& d);
ordered_json diff_epitome_json(const DiffEpitome& d);
ordered_json similarity_json(const SimilarityAggregate& s);
ordered_json test_result_json(const stats::TestResult& r);

struct LabeledTest {
  std::string label;
  stats::TestResult result;
};

/// Inputs of one metric report. Absent parts are omitted from the output.
struct ReportParts {
  RunConfig config;
  std::size_t n_examples = 0;
  std::optional<LengthStats> length;
  std::optional<AggregateStat> specificity;
  std::optional<FeatureAggregate> iva;
  std::optional<DiversityReport> diversity;
  std::optional<DiffEpitome> diff_per_example;
  std::optional<DiffEpitome> diff_dataset_mean;
  std::optional<SimilarityAggregate> similarity;
  std::vector<LabeledTest> stats;
  std::vector<std::string> warnings;
};

/// Report object; contains nothing that varies between identical runs.
ordered_json build_report(const ReportParts& parts);

/// Throws SchemaError when `j` is not a report this version understands.
void check_schema(const nlohmann::json& j);

struct VerifyOutcome {
  std::vector<std::string> mismatches;
  std::size_t checked = 0;
  bool ok() const { return mismatches.empty(); }
};

/// Recomputes the length, specificity, IVA and diversity aggregates from the
/// per-example rows and compares them with the report.
VerifyOutcome verify_report(const nlohmann::json& report, std::span<const ExampleScore> rows, double tol = 1e-9);

/// Markdown tables shaped like the published diversity and specificity/IVA
/// tables, one row per report, plus length, external and test sections.
std::string render_markdown(std::span<const nlohmann::json> reports);

/// "diversity", "features", "length" or "external".
std::string render_csv(std::span<const nlohmann::json> reports, std::string_view table);

/// Long-format value,model,metric rows for every defined per-example value.
std::string render_plotdata(std::span<const nlohmann::json> reports,
                            std::span<const std::vector<ExampleScore>> rows);

}  // namespace polarpref::report
