#include "polarpref/preference.hpp"

#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "polarpref/rng.hpp"

namespace polarpref {

using ordered_json = nlohmann::ordered_json;

void EpochPlan::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1, got " + std::to_string(epochs));
}

std::uint64_t example_seed(std::uint64_t base_seed, int epoch, std::string_view dialogue_id) {
  return rng::derive(rng::derive(base_seed, static_cast<std::uint64_t>(epoch)), rng::hash_string(dialogue_id));
}

namespace {

struct Candidate {
  const Dialogue* dialogue;
  std::string target_text;
};

struct Draw {
  std::size_t pick = 0;
  bool redrawn = false;
  bool unresolved = false;
};

Draw draw_rejected(std::uint64_t seed, const std::vector<Candidate>& group, const std::string& chosen) {
  rng::Stream stream(seed);
  Draw d;
  d.pick = static_cast<std::size_t>(stream.uniform(group.size()));
  if (group[d.pick].target_text == chosen) {
    d.redrawn = true;
    d.pick = static_cast<std::size_t>(stream.uniform(group.size()));
    d.unresolved = group[d.pick].target_text == chosen;
  }
  return d;
}

}  // namespace

EpochResult build_epoch(const Corpus& c, Split split, int epoch, std::uint64_t base_seed, const OppositeTable& table,
                        Exec exec) {
  if (epoch < 0) throw std::invalid_argument("epoch must be >= 0");

  std::array<std::vector<Candidate>, kEmotionCount> groups;
  for (Emotion e : all_emotions()) {
    for (auto i : c.emotion_indices(split, e)) {
      const Dialogue& d = c.dialogues()[i];
      if (auto t = last_response_target(d)) groups[index_of(e)].push_back(Candidate{&d, std::move(t->target.text)});
    }
  }

  struct Source {
    const Dialogue* dialogue;
    ResponseTarget target;
  };
  std::vector<Source> sources;
  EpochResult result;
  result.epoch = epoch;
  for (auto i : c.split_indices(split)) {
    const Dialogue& d = c.dialogues()[i];
    auto t = last_response_target(d);
    if (!t) {
      ++result.summary.skipped_no_target;
      continue;
    }
    const Emotion opp = table.opposite_of(d.emotion);
    if (groups[index_of(opp)].empty()) {
      throw PreferenceError("no dialogues labeled '" + std::string(to_string(opp)) + "' (opposite of '" +
                            std::string(to_string(d.emotion)) + "') in split '" + std::string(to_string(split)) + "'");
    }
    sources.push_back(Source{&d, std::move(*t)});
  }

  const auto n = static_cast<std::ptrdiff_t>(sources.size());
  std::vector<PreferenceExample> examples(sources.size());
  std::vector<Draw> draws(sources.size());

  auto make_one = [&](std::ptrdiff_t k) {
    const Source& s = sources[static_cast<std::size_t>(k)];
    const Emotion opp = table.opposite_of(s.dialogue->emotion);
    const auto& group = groups[index_of(opp)];
    PreferenceExample& ex = examples[static_cast<std::size_t>(k)];
    ex.dialogue_id = s.dialogue->id;
    ex.context = s.target.context;
    ex.chosen = s.target.target.text;
    ex.emotion = s.dialogue->emotion;
    ex.opposite_emotion = opp;
    ex.epoch = epoch;
    ex.seed = example_seed(base_seed, epoch, ex.dialogue_id);
    const Draw d = draw_rejected(ex.seed, group, ex.chosen);
    ex.rejected = group[d.pick].target_text;
    ex.rejected_source_id = group[d.pick].dialogue->id;
    draws[static_cast<std::size_t>(k)] = d;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) make_one(k);
  } else {
    for (std::ptrdiff_t k = 0; k < n; ++k) make_one(k);
  }

  auto& summary = result.summary;
  summary.examples = examples.size();
  for (std::size_t k = 0; k < examples.size(); ++k) {
    ++summary.per_emotion[index_of(examples[k].emotion)];
    if (draws[k].redrawn) ++summary.redraws;
    if (draws[k].unresolved) summary.unresolved_collisions.push_back(examples[k].dialogue_id);
  }
  result.examples = std::move(examples);
  return result;
}

std::vector<EpochResult> build_multi_epoch(const Corpus& c, const EpochPlan& plan, const OppositeTable& table,
                                           Exec exec) {
  plan.validate();
  std::vector<EpochResult> out;
  out.reserve(static_cast<std::size_t>(plan.epochs));
  for (int e = 0; e < plan.epochs; ++e) out.push_back(build_epoch(c, plan.split, e, plan.base_seed, table, exec));
  return out;
}

void serialize_preferences(std::span<const PreferenceExample> examples, std::ostream& sink,
                           const std::optional<std::string>& system) {
  for (const auto& ex : examples) {
    ordered_json j;
    j["dialogue_id"] = ex.dialogue_id;
    j["epoch"] = ex.epoch;
    j["seed"] = ex.seed;
    j["emotion"] = to_string(ex.emotion);
    j["opposite_emotion"] = to_string(ex.opposite_emotion);
    j["rejected_source_id"] = ex.rejected_source_id;
    if (system) j["system"] = *system;
    auto ctx = ordered_json::array();
    for (const auto& t : ex.context) {
      ctx.push_back(ordered_json{{"role", t.role == Role::speaker ? "user" : "assistant"}, {"text", t.text}});
    }
    j["context"] = std::move(ctx);
    j["chosen"] = ex.chosen;
    j["rejected"] = ex.rejected;
    sink << j.dump() << '\n';
    if (!sink) throw std::runtime_error("failed writing preference record for " + ex.dialogue_id);
  }
  sink.flush();
  if (!sink) throw std::runtime_error("failed flushing preference output");
}

std::vector<PreferenceExample> read_preferences(std::istream& in) {
  std::vector<PreferenceExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    PreferenceExample ex;
    ex.dialogue_id = j.at("dialogue_id").get<std::string>();
    ex.epoch = j.at("epoch").get<int>();
    ex.seed = j.at("seed").get<std::uint64_t>();
    ex.emotion = emotion_from_string(j.at("emotion").get<std::string>());
    ex.opposite_emotion = emotion_from_string(j.at("opposite_emotion").get<std::string>());
    ex.rejected_source_id = j.at("rejected_source_id").get<std::string>();
    int index = 1;
    for (const auto& t : j.at("context")) {
      const auto role = t.at("role").get<std::string>();
      Turn turn{index, role == "user" ? Role::speaker : Role::listener, t.at("text").get<std::string>()};
      ++index;
      ex.context.push_back(std::move(turn));
    }
    ex.chosen = j.at("chosen").get<std::string>();
    ex.rejected = j.at("rejected").get<std::string>();
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace polarpref
