#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polarpref {

/// Epitome levels for one response: emotional reactions, explorations and
/// interpretations, each in [0, 2].
struct EpitomeRecord {
  std::string dialogue_id;
  double er = 0.0;
  double ex = 0.0;
  double ip = 0.0;
};

struct SimilarityRecord {
  std::string dialogue_id;
  double f_score = 0.0;
};

enum class DiffMode { per_example, dataset_mean };
std::string_view to_string(DiffMode m);
DiffMode diff_mode_from_string(std::string_view s);

struct DiffEpitome {
  double er = 0.0;
  double ex = 0.0;
  double ip = 0.0;
  double mean_of_three = 0.0;
};

/// Raised when the generated and ground-truth files cover different ids.
class IdMismatchError : public std::runtime_error {
 public:
  IdMismatchError(std::vector<std::string> missing_in_gen, std::vector<std::string> missing_in_gt);
  const std::vector<std::string>& missing_in_generated() const { return missing_gen_; }
  const std::vector<std::string>& missing_in_ground_truth() const { return missing_gt_; }

 private:
  std::vector<std::string> missing_gen_;
  std::vector<std::string> missing_gt_;
};

/// per_example: mean over ids of |gen - gt|; dataset_mean: |mean(gen) - mean(gt)|.
DiffEpitome diff_epitome(std::span<const EpitomeRecord> gen, std::span<const EpitomeRecord> gt,
                         DiffMode mode = DiffMode::per_example);

/// Mean of three component diffs.
double mean_of_three(double er, double ex, double ip);

struct SimilarityAggregate {
  double mean = 0.0;
  std::optional<double> sd;  ///< undefined for a single record
  std::size_t n = 0;
};

/// Throws std::invalid_argument on an empty list.
SimilarityAggregate aggregate_similarity(std::span<const SimilarityRecord> records);

/// JSON-lines {"dialogue_id","er","ex","ip"}; values must lie in [0, 2].
std::vector<EpitomeRecord> read_epitome(std::istream& in);
std::vector<EpitomeRecord> read_epitome_file(const std::filesystem::path& path);
/// JSON-lines {"dialogue_id","f_score"}; values must lie in [0, 1].
std::vector<SimilarityRecord> read_similarity(std::istream& in);
std::vector<SimilarityRecord> read_similarity_file(const std::filesystem::path& path);

}  // namespace polarpref
