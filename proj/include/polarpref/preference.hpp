#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polarpref/corpus.hpp"
#include "polarpref/exec.hpp"
#include "polarpref/opposites.hpp"

namespace polarpref {

/// One (context, chosen, rejected) training triple. `chosen` is the source
/// dialogue's last listener turn; `rejected` is the last listener turn of a
/// same-split dialogue labeled with the opposite emotion.
struct PreferenceExample {
  std::string dialogue_id;
  std::vector<Turn> context;
  std::string chosen;
  std::string rejected;
  Emotion emotion = Emotion::afraid;
  Emotion opposite_emotion = Emotion::angry;
  std::string rejected_source_id;
  int epoch = 0;
  /// Key of the per-example random stream, derived from
  /// (base_seed, epoch, dialogue_id).
  std::uint64_t seed = 0;

  friend bool operator==(const PreferenceExample&, const PreferenceExample&) = default;
};

struct EpochPlan {
  std::uint64_t base_seed = 0;
  int epochs = 1;
  Split split = Split::train;

  /// Throws std::invalid_argument when epochs < 1.
  void validate() const;
};

struct BuildSummary {
  std::size_t examples = 0;
  /// Dialogues in the split without a listener turn.
  std::size_t skipped_no_target = 0;
  /// Draws whose rejected text equalled the chosen text and were re-drawn.
  std::size_t redraws = 0;
  /// Ids whose re-draw still collided; the example is kept.
  std::vector<std::string> unresolved_collisions;
  std::array<std::size_t, kEmotionCount> per_emotion{};
};

struct EpochResult {
  int epoch = 0;
  std::vector<PreferenceExample> examples;
  BuildSummary summary;
};

/// Raised when a label that occurs in the split has an empty opposite group.
class PreferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stream key for one example's draws.
std::uint64_t example_seed(std::uint64_t base_seed, int epoch, std::string_view dialogue_id);

/// One example per split dialogue with a target, in corpus order. The
/// rejected source is drawn uniformly from the opposite-label group of the
/// same split; a draw whose text equals the chosen text is re-drawn once.
EpochResult build_epoch(const Corpus& c, Split split, int epoch, std::uint64_t base_seed, const OppositeTable& table,
                        Exec exec = Exec::parallel);

/// build_epoch for epoch = 0 .. plan.epochs-1.
std::vector<EpochResult> build_multi_epoch(const Corpus& c, const EpochPlan& plan, const OppositeTable& table,
                                           Exec exec = Exec::parallel);

/// JSON-lines, one record per example. Speaker turns become "user", listener
/// turns "assistant". `system` is passed through verbatim when present.
void serialize_preferences(std::span<const PreferenceExample> examples, std::ostream& sink,
                           const std::optional<std::string>& system = std::nullopt);

std::vector<PreferenceExample> read_preferences(std::istream& in);

}  // namespace polarpref
