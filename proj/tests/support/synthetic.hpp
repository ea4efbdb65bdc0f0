#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarpref/emotion.hpp"

namespace polarpref::testing {

inline constexpr const char* kRawHeader = "conv_id,utterance_idx,context,prompt,speaker_idx,utterance,selfeval,tags";

struct RawRow {
  std::string conv_id;
  int index;
  std::string emotion;
  std::string situation;
  std::string text;
};

/// Renders rows in the raw corpus layout, escaping commas as _comma_.
std::string raw_csv(const std::vector<RawRow>& rows);

/// Rows of one well-formed conversation with the given turn texts.
std::vector<RawRow> conversation(const std::string& id, const std::string& emotion, const std::vector<std::string>& turns,
                                 const std::string& situation = "a situation");

struct SyntheticOptions {
  std::size_t dialogues = 1000;
  std::uint64_t seed = 1;
  std::string id_prefix = "syn";
  /// Share of dialogues that end on a speaker turn.
  double odd_ending_share = 0.2;
};

/// Deterministic corpus-shaped CSV: labels spread over all 32 emotions,
/// 2 to 6 turns, mostly unique utterances built from a small vocabulary.
std::string synthetic_raw_csv(const SyntheticOptions& opt);

/// Words that the synthetic lexicons below cover.
const std::vector<std::string>& synthetic_vocabulary();
/// VAD / intensity TSV covering part of synthetic_vocabulary().
std::string synthetic_vad_tsv();
std::string synthetic_intensity_tsv();

}  // namespace polarpref::testing
