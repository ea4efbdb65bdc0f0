#include "polarpref/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "polarpref/text.hpp"

namespace polarpref {

namespace {

std::string trim_ascii(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected true/false, got '" + std::string(v) + "'");
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    if (s.empty() || s.front() == '-') throw std::invalid_argument("negative");
    const auto x = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return static_cast<T>(x);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                      std::string(v) + "'");
  }
}

template <typename F>
auto wrap(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  }
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ',';
    out += x;
  }
  return out;
}

std::string_view to_string(IntensityCombine c) { return c == IntensityCombine::max ? "max" : "mean"; }

}  // namespace

std::string_view RunConfig::text_tokenizer_version() { return text::kTokenizerVersion; }

bool RunConfig::wants(std::string_view metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

std::vector<std::string> parse_metric_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = std::min(s.find(',', start), s.size());
    const auto name = trim_ascii(s.substr(start, end - start));
    if (!name.empty()) {
      const auto& known = all_metric_names();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError("unknown metric '" + name + "' (known: nidf, iva, diversity, length)");
      }
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    start = end + 1;
  }
  if (out.empty()) throw ConfigError("metric list is empty");
  return out;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
  const std::string v(value);
  if (key == "corpus") c.corpus = v;
  else if (key == "generations") c.generations = v;
  else if (key == "vad") c.vad = v;
  else if (key == "intensity") c.intensity = v;
  else if (key == "nidf_cache") c.nidf_cache = v;
  else if (key == "epitome_gen") c.epitome_gen = v;
  else if (key == "epitome_gt") c.epitome_gt = v;
  else if (key == "similarity") c.similarity = v;
  else if (key == "out_dir") c.out_dir = v;
  else if (key == "model_name") c.model_name = v;
  else if (key == "tokenizer_version") {
    if (v != text::kTokenizerVersion) {
      throw ConfigError("tokenizer_version '" + v + "' is not available (this build has '" +
                        std::string(text::kTokenizerVersion) + "')");
    }
    c.tokenizer_version = v;
  } else if (key == "nidf_reference") c.nidf_reference = wrap(key, [&] { return nidf_reference_from_string(v); });
  else if (key == "prompt_mode") c.prompt_mode = wrap(key, [&] { return prompt_mode_from_string(v); });
  else if (key == "include_situation") c.include_situation = parse_bool(key, v);
  else if (key == "intensity_combine") {
    if (v == "max") c.intensity_combine = IntensityCombine::max;
    else if (v == "mean") c.intensity_combine = IntensityCombine::mean;
    else throw ConfigError("config key 'intensity_combine': expected max or mean, got '" + v + "'");
  } else if (key == "diff_mode") c.diff_mode = wrap(key, [&] { return diff_mode_from_string(v); });
  else if (key == "seed") c.seed = parse_unsigned<std::uint64_t>(key, v);
  else if (key == "resamples") c.resamples = parse_unsigned<std::size_t>(key, v);
  else if (key == "metrics") c.metrics = parse_metric_list(v);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig read_run_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim_ascii(line);
    if (t.empty() || t.front() == '#' || t.front() == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim_ascii(std::string_view(t).substr(0, eq));
    const auto value = unquote(trim_ascii(std::string_view(t).substr(eq + 1)));
    try {
      set_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig read_run_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return read_run_config(in, std::move(base));
}

void write_run_config(const RunConfig& c, std::ostream& out) {
  const auto j = to_json(c);
  for (const auto& [k, v] : j.items()) {
    out << k << " = ";
    if (v.is_string()) out << '"' << v.get<std::string>() << '"';
    else if (v.is_array()) out << '"' << join(v.get<std::vector<std::string>>()) << '"';
    else out << v.dump();
    out << '\n';
  }
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["corpus"] = c.corpus;
  j["generations"] = c.generations;
  j["vad"] = c.vad;
  j["intensity"] = c.intensity;
  j["nidf_cache"] = c.nidf_cache;
  j["epitome_gen"] = c.epitome_gen;
  j["epitome_gt"] = c.epitome_gt;
  j["similarity"] = c.similarity;
  j["out_dir"] = c.out_dir;
  j["model_name"] = c.model_name;
  j["tokenizer_version"] = c.tokenizer_version;
  j["nidf_reference"] = to_string(c.nidf_reference);
  j["prompt_mode"] = to_string(c.prompt_mode);
  j["include_situation"] = c.include_situation;
  j["intensity_combine"] = to_string(c.intensity_combine);
  j["diff_mode"] = to_string(c.diff_mode);
  j["seed"] = c.seed;
  j["resamples"] = c.resamples;
  j["metrics"] = c.metrics;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (!j.is_object()) throw ConfigError("config echo is not an object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) set_config_value(c, k, v.get<std::string>());
    else if (v.is_boolean()) set_config_value(c, k, v.get<bool>() ? "true" : "false");
    else if (v.is_number_unsigned()) set_config_value(c, k, std::to_string(v.get<std::uint64_t>()));
    else if (v.is_array()) set_config_value(c, k, join(v.get<std::vector<std::string>>()));
    else throw ConfigError("config key '" + k + "' has an unsupported value");
  }
  return c;
}

void apply_lexicon_dir(RunConfig& c, const std::filesystem::path& dir) {
  if (c.vad.empty()) c.vad = (dir / kVadFileName).string();
  if (c.intensity.empty()) c.intensity = (dir / kIntensityFileName).string();
}

std::optional<std::filesystem::path> lexicon_dir_from_env() {
  const char* v = std::getenv(kLexiconDirEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::filesystem::path(v);
}

std::vector<std::string> missing_paths(const RunConfig& c) {
  std::vector<std::string> out;
  for (const std::string* p : {&c.corpus, &c.generations, &c.vad, &c.intensity, &c.epitome_gen, &c.epitome_gt,
                               &c.similarity}) {
    if (!p->empty() && !std::filesystem::exists(*p)) out.push_back(*p);
  }
  return out;
}

}  // namespace polarpref
