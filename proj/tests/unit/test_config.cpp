#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "polarpref/config.hpp"

using namespace polarpref;

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.prompt_mode == PromptMode::all_context);
  CHECK_FALSE(c.include_situation);
  CHECK(c.nidf_reference == NidfReference::train_utterances);
  CHECK(c.intensity_combine == IntensityCombine::max);
  CHECK(c.diff_mode == DiffMode::per_example);
  CHECK(c.resamples == 10000);
  CHECK(c.metrics == all_metric_names());
  CHECK(c.wants("diversity"));
}

TEST_CASE("key = value parsing") {
  std::istringstream in(
      "# comment\n"
      "[eval]\n"
      "corpus = \"data/corpus.jsonl\"\n"
      "metrics = nidf, length\n"
      "prompt_mode = last-user-turn\n"
      "include_situation = true\n"
      "seed = 42\n"
      "\n"
      "model_name = 'Ours'\n");
  const auto c = read_run_config(in);
  CHECK(c.corpus == "data/corpus.jsonl");
  CHECK(c.metrics == std::vector<std::string>{"nidf", "length"});
  CHECK_FALSE(c.wants("iva"));
  CHECK(c.prompt_mode == PromptMode::last_user_turn);
  CHECK(c.include_situation);
  CHECK(c.seed == 42);
  CHECK(c.model_name == "Ours");
}

TEST_CASE("bad settings raise ConfigError") {
  RunConfig c;
  CHECK_THROWS_AS(set_config_value(c, "nosuch", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "seed", "-3"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "seed", "12x"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "include_situation", "perhaps"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "prompt_mode", "random"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "tokenizer_version", "other-tokenizer"), ConfigError);
  CHECK_THROWS_AS(parse_metric_list("nidf,bleu"), ConfigError);
  std::istringstream no_eq("corpus\n");
  CHECK_THROWS_AS(read_run_config(no_eq), ConfigError);
}

TEST_CASE("write/read and json round-trips") {
  RunConfig c;
  c.corpus = "c.jsonl";
  c.generations = "g.jsonl";
  c.model_name = "Model X";
  c.prompt_mode = PromptMode::per_turn_mean;
  c.intensity_combine = IntensityCombine::mean;
  c.diff_mode = DiffMode::dataset_mean;
  c.nidf_reference = NidfReference::train_responses;
  c.seed = 9;
  c.resamples = 123;
  c.metrics = {"iva", "diversity"};

  std::ostringstream out;
  write_run_config(c, out);
  std::istringstream in(out.str());
  const auto back = read_run_config(in);
  CHECK(to_json(back) == to_json(c));

  const auto j = to_json(c);
  CHECK(to_json(run_config_from_json(j)) == j);
  CHECK(j.at("tokenizer_version") == std::string(RunConfig::text_tokenizer_version()));
}

TEST_CASE("lexicon directory fills only unset paths") {
  RunConfig c;
  c.vad = "mine.tsv";
  apply_lexicon_dir(c, "/lex");
  CHECK(c.vad == "mine.tsv");
  CHECK(std::filesystem::path(c.intensity) == std::filesystem::path("/lex") / kIntensityFileName);

  ::setenv(kLexiconDirEnv, "/somewhere", 1);
  CHECK(lexicon_dir_from_env() == std::filesystem::path("/somewhere"));
  ::unsetenv(kLexiconDirEnv);
  CHECK_FALSE(lexicon_dir_from_env());
}

TEST_CASE("missing_paths lists absent inputs") {
  RunConfig c;
  c.corpus = "/nonexistent/corpus.jsonl";
  c.nidf_cache = "/nonexistent/cache.tsv";
  const auto m = missing_paths(c);
  REQUIRE(m.size() == 1);
  CHECK(m[0] == "/nonexistent/corpus.jsonl");
}
