#include "synthetic.hpp"

#include <cstdio>
#include <sstream>

#include "polarpref/rng.hpp"

namespace polarpref::testing {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ',') out += "_comma_";
    else out.push_back(c);
  }
  return out;
}

const std::vector<std::string> kWords = {
    "i",       "you",     "we",       "it",      "that",     "was",      "is",      "so",      "really",
    "very",    "my",      "your",     "the",     "a",        "to",       "and",     "but",     "when",
    "happy",   "sad",     "angry",    "afraid",  "glad",     "sorry",    "great",   "terrible", "awful",
    "nice",    "lonely",  "proud",    "excited", "nervous",  "calm",     "love",    "hate",    "hope",
    "friend",  "family",  "job",      "dog",     "cat",      "car",      "house",   "school",  "trip",
    "night",   "day",     "week",     "year",    "money",    "gift",     "party",   "storm",   "exam",
    "lost",    "found",   "won",      "broke",   "called",   "visited",  "forgot",  "cried",   "laughed",
    "yesterday", "today", "tomorrow", "finally", "again",    "never",    "always",  "maybe",   "wow",
    "oh",      "no",      "yes",      "well",    "hear",     "feel",     "think",   "know",    "did",
    "what",    "how",     "why",      "good",    "bad",      "scared",   "thrilled", "jealous", "grateful",
};

std::string sentence(rng::Stream& s, std::size_t min_len, std::size_t max_len) {
  const std::size_t len = min_len + static_cast<std::size_t>(s.uniform(max_len - min_len + 1));
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    if (!out.empty()) out.push_back(' ');
    std::string w = kWords[static_cast<std::size_t>(s.uniform(kWords.size()))];
    if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    out += w;
    if (i + 1 < len && s.uniform(7) == 0) out.push_back(',');
  }
  out.push_back(s.uniform(3) == 0 ? '!' : '.');
  return out;
}

}  // namespace

std::string raw_csv(const std::vector<RawRow>& rows) {
  std::ostringstream out;
  out << kRawHeader << '\n';
  for (const auto& r : rows) {
    const int speaker = r.index % 2 == 1 ? 1 : 2;
    out << r.conv_id << ',' << r.index << ',' << r.emotion << ',' << escape(r.situation) << ',' << speaker << ','
        << escape(r.text) << ",,\n";
  }
  return out.str();
}

std::vector<RawRow> conversation(const std::string& id, const std::string& emotion, const std::vector<std::string>& turns,
                                 const std::string& situation) {
  std::vector<RawRow> rows;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    rows.push_back(RawRow{id, static_cast<int>(i) + 1, emotion, situation, turns[i]});
  }
  return rows;
}

std::string synthetic_raw_csv(const SyntheticOptions& opt) {
  std::vector<RawRow> rows;
  rng::Stream s(rng::derive(opt.seed, 0xC0FFEE));
  for (std::size_t d = 0; d < opt.dialogues; ++d) {
    const auto emotion = std::string(to_string(static_cast<Emotion>(d % kEmotionCount)));
    const std::string id = opt.id_prefix + ":" + std::to_string(d);
    std::size_t n_turns = 2 + 2 * static_cast<std::size_t>(s.uniform(3));
    if (s.unit() < opt.odd_ending_share) n_turns += 1;
    const std::string situation = sentence(s, 6, 16);
    std::vector<std::string> turns;
    for (std::size_t t = 0; t < n_turns; ++t) turns.push_back(sentence(s, 4, 18));
    auto conv = conversation(id, emotion, turns, situation);
    rows.insert(rows.end(), conv.begin(), conv.end());
  }
  return raw_csv(rows);
}

const std::vector<std::string>& synthetic_vocabulary() { return kWords; }

std::string synthetic_vad_tsv() {
  std::ostringstream out;
  out << "Word\tValence\tArousal\tDominance\n";
  rng::Stream s(77);
  for (std::size_t i = 0; i < kWords.size(); i += 2) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.3f\t%.3f\t%.3f", s.unit(), s.unit(), s.unit());
    out << kWords[i] << '\t' << buf << '\n';
  }
  return out.str();
}

std::string synthetic_intensity_tsv() {
  std::ostringstream out;
  rng::Stream s(78);
  const char* emotions[] = {"anger", "fear", "joy", "sadness"};
  for (std::size_t i = 0; i < kWords.size(); i += 3) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", s.unit());
    out << kWords[i] << '\t' << emotions[i % 4] << '\t' << buf << '\n';
  }
  return out.str();
}

}  // namespace polarpref::testing
