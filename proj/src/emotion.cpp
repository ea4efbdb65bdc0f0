#include "polarpref/emotion.hpp"

#include <stdexcept>

namespace polarpref {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kNames = {
    "afraid",      "angry",       "sad",          "joyful",    "grateful",
    "surprised",   "trusting",    "disgusted",    "anticipating", "content",
    "apprehensive", "proud",      "prepared",     "ashamed",   "guilty",
    "nostalgic",   "anxious",     "hopeful",      "sentimental", "jealous",
    "embarrassed", "excited",     "annoyed",      "lonely",    "faithful",
    "terrified",   "confident",   "furious",      "disappointed", "caring",
    "impressed",   "devastated",
};

constexpr std::array<Emotion, kEmotionCount> make_all() {
  std::array<Emotion, kEmotionCount> out{};
  for (std::size_t i = 0; i < kEmotionCount; ++i) out[i] = static_cast<Emotion>(i);
  return out;
}

constexpr auto kAll = make_all();

}  // namespace

std::string_view to_string(Emotion e) { return kNames.at(index_of(e)); }

std::optional<Emotion> parse_emotion(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (kNames[i] == name) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

Emotion emotion_from_string(std::string_view name) {
  if (auto e = parse_emotion(name)) return *e;
  throw std::invalid_argument("unknown emotion label: '" + std::string(name) + "'");
}

const std::array<Emotion, kEmotionCount>& all_emotions() { return kAll; }

}  // namespace polarpref
