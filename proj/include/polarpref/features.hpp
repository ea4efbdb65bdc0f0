#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polarpref/corpus.hpp"
#include "polarpref/exec.hpp"
#include "polarpref/lexicons.hpp"

namespace polarpref {

enum class Dim { intensity = 0, valence = 1, arousal = 2 };
inline constexpr std::array<Dim, 3> kDims = {Dim::intensity, Dim::valence, Dim::arousal};
std::string_view to_string(Dim d);

/// Lexicon scores of one utterance. Each score is the mean over matched
/// token occurrences and is nullopt when no token matched.
struct UtteranceScore {
  std::optional<double> nidf_mean;
  std::optional<double> intensity;
  std::optional<double> valence;
  std::optional<double> arousal;
  std::size_t nidf_matched = 0;
  std::size_t intensity_matched = 0;
  std::size_t vad_matched = 0;

  std::optional<double> get(Dim d) const;
};

/// Prompt-minus-response differences per dimension; undefined when either
/// side is undefined.
struct PairScore {
  std::array<std::optional<double>, 3> signed_delta;

  std::optional<double> signed_of(Dim d) const { return signed_delta[static_cast<std::size_t>(d)]; }
  std::optional<double> distance(Dim d) const;
};

struct LengthStats {
  double mean_chars = 0.0;
  double median_chars = 0.0;
  double mean_tokens = 0.0;
  std::size_t n = 0;
};

/// Lexicons used by word-choice scoring. Either pointer may be null, which
/// leaves the corresponding dimensions undefined.
struct WordLexicons {
  const VadLexicon* vad = nullptr;
  const IntensityLexicon* intensity = nullptr;
};

/// Mean NIDF over tokens found in the table; tokens outside it are skipped.
std::optional<double> specificity(std::string_view response, const NidfTable& table);
std::optional<double> specificity_tokens(std::span<const std::string> tokens, const NidfTable& table);

/// Intensity, valence and arousal of a text (dominance is not used).
UtteranceScore word_scores(std::string_view text, const WordLexicons& lex);
UtteranceScore word_scores_tokens(std::span<const std::string> tokens, const WordLexicons& lex);

PairScore pair_from_scores(const UtteranceScore& prompt, const UtteranceScore& response);
PairScore iva_pair(std::string_view prompt_text, std::string_view response_text, const WordLexicons& lex);

/// How the dialogue context is turned into the prompt side of a pair.
enum class PromptMode {
  all_context,     ///< all context turns joined with single spaces
  last_user_turn,  ///< the last speaker turn only
  per_turn_mean,   ///< each context turn scored separately, defined scores averaged
};
std::string_view to_string(PromptMode m);
PromptMode prompt_mode_from_string(std::string_view s);

/// All-context prompt text. Throws std::invalid_argument on empty context.
std::string prompt_of(std::span<const Turn> context);

/// Prompt-side word scores under a mode. `situation`, when given, is treated
/// as an extra leading turn.
UtteranceScore prompt_scores(std::span<const Turn> context, PromptMode mode, const WordLexicons& lex,
                             const std::optional<std::string>& situation = std::nullopt);

/// Throws std::invalid_argument on an empty list.
LengthStats length_stats(std::span<const std::string> responses);

struct EvalItem {
  std::string dialogue_id;
  std::vector<Turn> context;
  std::string response;
  std::optional<std::string> situation;
};

struct ExampleScore {
  std::string dialogue_id;
  std::string response;
  std::size_t chars = 0;
  std::size_t tokens = 0;
  std::optional<double> specificity;
  UtteranceScore prompt;
  UtteranceScore response_scores;
  PairScore pair;
};

struct ScoringSetup {
  const NidfTable* nidf = nullptr;  ///< null skips specificity
  WordLexicons lex;                 ///< both null skips word choice
  PromptMode mode = PromptMode::all_context;
  bool include_situation = false;
};

/// Per-example scoring; output order matches input order for both paths.
std::vector<ExampleScore> score_examples(std::span<const EvalItem> items, const ScoringSetup& setup,
                                         Exec exec = Exec::parallel);

/// Mean and sample SD (n-1) over the defined values; counts reconcile as
/// defined + excluded = n. SD is undefined for fewer than two values.
struct AggregateStat {
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> min;
  std::optional<double> max;
  std::size_t defined = 0;
  std::size_t excluded = 0;
};

AggregateStat aggregate(std::span<const std::optional<double>> values);

struct FeatureAggregate {
  AggregateStat specificity;
  std::array<AggregateStat, 3> distance;
  std::array<AggregateStat, 3> signed_delta;
  std::size_t n = 0;
};

FeatureAggregate aggregate_feature_report(std::span<const ExampleScore> scores);

/// Length statistics straight from already-scored examples.
LengthStats length_stats_from_scores(std::span<const ExampleScore> scores);

}  // namespace polarpref
