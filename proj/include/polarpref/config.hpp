#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarpref/external.hpp"
#include "polarpref/features.hpp"
#include "polarpref/lexicons.hpp"

namespace polarpref {

inline constexpr std::string_view kToolName = "polarpref";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Directory searched for the lexicon files when no explicit path is given.
inline constexpr const char* kLexiconDirEnv = "POLARPREF_LEXICON_DIR";
/// File names of the published lexicons inside that directory.
inline constexpr std::string_view kVadFileName = "NRC-VAD-Lexicon.txt";
inline constexpr std::string_view kIntensityFileName = "NRC-Emotion-Intensity-Lexicon-v1.txt";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& all_metric_names() {
  static const std::vector<std::string> names = {"nidf", "iva", "diversity", "length"};
  return names;
}

/// Everything that determines an evaluation run. Serialized into every
/// report; re-running from the echoed config reproduces the report.
struct RunConfig {
  std::string corpus;
  std::string generations;
  std::string vad;
  std::string intensity;
  std::string nidf_cache;
  std::string epitome_gen;
  std::string epitome_gt;
  std::string similarity;
  std::string out_dir;
  std::string model_name = "model";
  std::string tokenizer_version{text_tokenizer_version()};
  NidfReference nidf_reference = NidfReference::train_utterances;
  PromptMode prompt_mode = PromptMode::all_context;
  bool include_situation = false;
  IntensityCombine intensity_combine = IntensityCombine::max;
  DiffMode diff_mode = DiffMode::per_example;
  std::uint64_t seed = 0;
  std::size_t resamples = 10000;
  std::vector<std::string> metrics = all_metric_names();

  bool wants(std::string_view metric) const;

  static std::string_view text_tokenizer_version();
};

/// Applies one key=value setting; throws ConfigError on unknown keys or
/// unparsable values.
void set_config_value(RunConfig& c, std::string_view key, std::string_view value);

/// TOML-like file: one key = value per line, '#' comments, optional quotes
/// around values.
RunConfig read_run_config(std::istream& in, RunConfig base = {});
RunConfig read_run_config_file(const std::filesystem::path& path, RunConfig base = {});
void write_run_config(const RunConfig& c, std::ostream& out);

nlohmann::ordered_json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Comma-separated metric list; throws ConfigError naming an unknown metric.
std::vector<std::string> parse_metric_list(std::string_view s);

/// Fills unset lexicon paths from a lexicon directory.
void apply_lexicon_dir(RunConfig& c, const std::filesystem::path& dir);
std::optional<std::filesystem::path> lexicon_dir_from_env();

/// Paths referenced by the config that do not exist.
std::vector<std::string> missing_paths(const RunConfig& c);

}  // namespace polarpref
