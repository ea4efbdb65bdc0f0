#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polarpref/corpus.hpp"
#include "polarpref/exec.hpp"

namespace polarpref {

class LexiconError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row counts from a lexicon load; skipped rows never reach the table.
struct LoadTally {
  std::size_t rows = 0;
  std::size_t header = 0;
  std::size_t skipped_multiword = 0;
  std::size_t skipped_malformed = 0;
  std::size_t skipped_out_of_range = 0;

  std::size_t skipped() const { return skipped_multiword + skipped_malformed + skipped_out_of_range; }
};

struct Vad {
  double valence = 0.0;
  double arousal = 0.0;
  double dominance = 0.0;
};

struct VadLexicon {
  std::unordered_map<std::string, Vad> entries;
  LoadTally tally;

  const Vad* find(const std::string& word) const {
    auto it = entries.find(word);
    return it == entries.end() ? nullptr : &it->second;
  }
};

enum class IntensityCombine { max, mean };

struct IntensityLexicon {
  std::unordered_map<std::string, double> entries;
  LoadTally tally;

  const double* find(const std::string& word) const {
    auto it = entries.find(word);
    return it == entries.end() ? nullptr : &it->second;
  }
};

/// NRC-VAD layout: word, valence, arousal, dominance (tab separated, values
/// in [0,1], optional header). Throws LexiconError when nothing usable loads.
VadLexicon load_vad(std::istream& in);
VadLexicon load_vad_file(const std::filesystem::path& path);

/// NRC Emotion Intensity layout: word, emotion, score. A word's intensity
/// combines its per-emotion scores (max by default).
IntensityLexicon load_intensity(std::istream& in, IntensityCombine combine = IntensityCombine::max);
IntensityLexicon load_intensity_file(const std::filesystem::path& path,
                                     IntensityCombine combine = IntensityCombine::max);

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

/// Normalized inverse document frequency over a reference set of R
/// documents: idf = ln(R / c_w), rescaled to [0,1] by the observed
/// min/max idf. All-equal idf maps every word to 0.
struct NidfTable {
  struct Entry {
    double nidf = 0.0;
    std::size_t doc_count = 0;
  };
  std::unordered_map<std::string, Entry> entries;
  std::size_t doc_count = 0;
  double min_idf = 0.0;
  double max_idf = 0.0;
  std::string tokenizer_version;

  const Entry* find(const std::string& word) const {
    auto it = entries.find(word);
    return it == entries.end() ? nullptr : &it->second;
  }
};

/// Throws LexiconError on an empty reference. Documents are tokenized in
/// parallel under Exec::parallel; the table is identical either way.
NidfTable build_nidf(std::span<const std::string> reference, const Tokenizer& tokenizer,
                     Exec exec = Exec::parallel, std::string_view tokenizer_version = "custom");
NidfTable build_nidf(std::span<const std::string> reference, Exec exec = Exec::parallel);

/// Cache format: one header line, then word \t nidf \t doc_count sorted by word.
void write_nidf(const NidfTable& table, std::ostream& out);
NidfTable read_nidf(std::istream& in);

enum class NidfReference { train_utterances, train_responses };

std::string_view to_string(NidfReference r);
NidfReference nidf_reference_from_string(std::string_view s);

/// The documents a NIDF table is built from: every utterance of the train
/// split (default), or only its listener turns.
std::vector<std::string> nidf_reference_documents(const Corpus& c, NidfReference which);

}  // namespace polarpref
