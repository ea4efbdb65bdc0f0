#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace polarpref {

// The closed set of 32 corpus emotion labels. Enumerator order is the
// canonical label order used for every per-label table and report.
enum class Emotion : std::uint8_t {
  afraid,
  angry,
  sad,
  joyful,
  grateful,
  surprised,
  trusting,
  disgusted,
  anticipating,
  content,
  apprehensive,
  proud,
  prepared,
  ashamed,
  guilty,
  nostalgic,
  anxious,
  hopeful,
  sentimental,
  jealous,
  embarrassed,
  excited,
  annoyed,
  lonely,
  faithful,
  terrified,
  confident,
  furious,
  disappointed,
  caring,
  impressed,
  devastated,
};

inline constexpr std::size_t kEmotionCount = 32;

std::string_view to_string(Emotion e);

/// Parses a label name (exact, lowercase). Returns nullopt for anything
/// outside the 32-label set.
std::optional<Emotion> parse_emotion(std::string_view name);

/// Like parse_emotion but throws std::invalid_argument.
Emotion emotion_from_string(std::string_view name);

constexpr std::size_t index_of(Emotion e) { return static_cast<std::size_t>(e); }

const std::array<Emotion, kEmotionCount>& all_emotions();

}  // namespace polarpref
