#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polarpref/preference.hpp"
#include "polarpref/rng.hpp"
#include "synthetic.hpp"

using namespace polarpref;
using polarpref::testing::conversation;
using polarpref::testing::raw_csv;
using polarpref::testing::RawRow;

namespace {

Corpus import_rows(const std::vector<RawRow>& rows, Split split = Split::train) {
  std::istringstream in(raw_csv(rows));
  ImportOptions opt;
  opt.split = split;
  return import_raw(in, opt);
}

Corpus two_dialogue_fixture() {
  auto rows = conversation("A", "afraid", {"There is a spider.", "Stay calm, I will help."});
  auto b = conversation("B", "angry", {"They cut me off!", "That is so rude of them."});
  rows.insert(rows.end(), b.begin(), b.end());
  return import_rows(rows);
}

// 10 afraid and 10 angry dialogues, each with a distinct listener reply.
Corpus twenty_dialogue_fixture() {
  std::vector<RawRow> rows;
  for (int i = 0; i < 20; ++i) {
    const char* label = i % 2 == 0 ? "afraid" : "angry";
    auto conv = conversation("d" + std::to_string(i), label,
                             {"opening " + std::to_string(i), "reply " + std::to_string(i)});
    rows.insert(rows.end(), conv.begin(), conv.end());
  }
  return import_rows(rows);
}

std::string dump(const std::vector<PreferenceExample>& ex) {
  std::ostringstream out;
  serialize_preferences(ex, out);
  return out.str();
}

}  // namespace

TEST_CASE("shipped opposite table") {
  const auto& t = OppositeTable::standard();
  CHECK(opposite_of(t, Emotion::afraid) == Emotion::angry);
  CHECK(t.entry(Emotion::afraid).source == OppositeSource::wheel);
  CHECK(opposite_of(t, Emotion::proud) == Emotion::ashamed);
  CHECK(t.entry(Emotion::proud).source == OppositeSource::dyads);
  CHECK(opposite_of(t, Emotion::lonely) == Emotion::caring);
  CHECK(t.entry(Emotion::lonely).source == OppositeSource::authors);

  // Not symmetric.
  CHECK(opposite_of(t, Emotion::grateful) == Emotion::disgusted);
  CHECK(opposite_of(t, Emotion::disgusted) == Emotion::trusting);

  for (Emotion e : all_emotions()) CHECK(t.opposite_of(e) != e);

  const std::map<std::string, std::string> expected = {
      {"afraid", "angry"},        {"angry", "afraid"},          {"sad", "joyful"},
      {"joyful", "sad"},          {"grateful", "disgusted"},    {"surprised", "anticipating"},
      {"anticipating", "surprised"}, {"trusting", "disgusted"}, {"disgusted", "trusting"},
      {"content", "anxious"},     {"anxious", "content"},       {"apprehensive", "annoyed"},
      {"proud", "ashamed"},       {"prepared", "anxious"},      {"ashamed", "proud"},
      {"guilty", "proud"},        {"nostalgic", "hopeful"},     {"hopeful", "nostalgic"},
      {"sentimental", "apprehensive"}, {"jealous", "faithful"}, {"faithful", "jealous"},
      {"embarrassed", "confident"}, {"confident", "embarrassed"}, {"excited", "devastated"},
      {"devastated", "excited"},  {"annoyed", "apprehensive"},  {"lonely", "caring"},
      {"caring", "lonely"},       {"terrified", "furious"},     {"furious", "terrified"},
      {"disappointed", "impressed"}, {"impressed", "disappointed"},
  };
  REQUIRE(expected.size() == 32);
  for (const auto& [label, opp] : expected) {
    CHECK(to_string(t.opposite_of(emotion_from_string(label))) == opp);
  }
}

TEST_CASE("shipped CSV matches the built-in table") {
  const auto t = read_opposite_table_file(std::string(POLARPREF_DATA_DIR) + "/opposites.csv");
  CHECK(t == OppositeTable::standard());
  std::ostringstream out;
  write_opposite_table(t, out);
  std::istringstream back(out.str());
  CHECK(read_opposite_table(back) == t);
}

TEST_CASE("opposite table validation") {
  SUBCASE("self-mapping") {
    std::ostringstream out;
    write_opposite_table(OppositeTable::standard(), out);
    std::string csv = out.str();
    const auto pos = csv.find("afraid,angry");
    csv.replace(pos, 12, "afraid,afraid");
    std::istringstream in(csv);
    CHECK_THROWS_AS(read_opposite_table(in), std::invalid_argument);
  }
  SUBCASE("missing label") {
    std::istringstream in("label,opposite,source\nafraid,angry,wheel\n");
    CHECK_THROWS_AS(read_opposite_table(in), std::invalid_argument);
  }
  SUBCASE("unknown label") {
    std::istringstream in("label,opposite,source\nhappy,sad,wheel\n");
    CHECK_THROWS_AS(read_opposite_table(in), std::invalid_argument);
  }
}

TEST_CASE("two dialogues: forced draws") {
  const auto c = two_dialogue_fixture();
  const auto r = build_epoch(c, Split::train, 0, 42, OppositeTable::standard());
  REQUIRE(r.examples.size() == 2);
  const auto& a = r.examples[0];
  const auto& b = r.examples[1];
  CHECK(a.dialogue_id == "A");
  CHECK(a.chosen == "Stay calm, I will help.");
  CHECK(a.rejected == "That is so rude of them.");
  CHECK(a.rejected_source_id == "B");
  CHECK(a.opposite_emotion == Emotion::angry);
  CHECK(b.rejected == "Stay calm, I will help.");
  CHECK(b.rejected_source_id == "A");
  REQUIRE(a.context.size() == 1);
  CHECK(a.context[0].text == "There is a spider.");

  CHECK(dump(r.examples) == dump(build_epoch(c, Split::train, 0, 42, OppositeTable::standard()).examples));

  std::istringstream lines(dump(r.examples));
  std::vector<nlohmann::json> recs;
  for (std::string line; std::getline(lines, line);) recs.push_back(nlohmann::json::parse(line));
  REQUIRE(recs.size() == 2);
  CHECK(recs[0]["rejected_source_id"] == recs[1]["dialogue_id"]);
  CHECK(recs[1]["rejected_source_id"] == recs[0]["dialogue_id"]);
}

TEST_CASE("multi-epoch on forced draws gives identical epochs") {
  const auto c = two_dialogue_fixture();
  const auto epochs = build_multi_epoch(c, EpochPlan{7, 3, Split::train}, OppositeTable::standard());
  REQUIRE(epochs.size() == 3);
  for (const auto& e : epochs) {
    REQUIRE(e.examples.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(e.examples[k].rejected == epochs[0].examples[k].rejected);
      CHECK(e.examples[k].chosen == epochs[0].examples[k].chosen);
    }
  }
  const auto single = build_multi_epoch(c, EpochPlan{7, 1, Split::train}, OppositeTable::standard());
  REQUIRE(single.size() == 1);
  CHECK(single[0].examples == build_epoch(c, Split::train, 0, 7, OppositeTable::standard()).examples);
  CHECK_THROWS_AS(build_multi_epoch(c, EpochPlan{7, 0, Split::train}, OppositeTable::standard()), std::invalid_argument);
}

TEST_CASE("twenty dialogues: epochs share chosen, redraw rejected") {
  const auto c = twenty_dialogue_fixture();
  const auto& t = OppositeTable::standard();
  const auto epochs = build_multi_epoch(c, EpochPlan{2024, 3, Split::train}, t);

  // Brute-force oracle: the admissible rejected texts for each id are the
  // replies of the ten dialogues with the other label.
  std::map<std::string, std::set<std::string>> admissible;
  for (const auto& d : c.dialogues()) {
    for (const auto& other : c.dialogues()) {
      if (other.emotion == t.opposite_of(d.emotion)) admissible[d.id].insert(other.turns.back().text);
    }
    CHECK(admissible[d.id].size() == 10);
  }

  bool any_differs = false;
  std::vector<std::multiset<std::string>> rejected_sets;
  for (const auto& e : epochs) {
    REQUIRE(e.examples.size() == 20);
    std::multiset<std::string> rs;
    for (std::size_t k = 0; k < 20; ++k) {
      const auto& ex = e.examples[k];
      CHECK(ex.dialogue_id == epochs[0].examples[k].dialogue_id);
      CHECK(ex.chosen == epochs[0].examples[k].chosen);
      CHECK(admissible[ex.dialogue_id].count(ex.rejected) == 1);
      if (ex.rejected != epochs[0].examples[k].rejected) any_differs = true;
      rs.insert(ex.rejected);
    }
    rejected_sets.push_back(rs);
  }
  CHECK(any_differs);
  CHECK(rejected_sets[0] != rejected_sets[1]);
  CHECK(rejected_sets[1] != rejected_sets[2]);
  CHECK(rejected_sets[0] != rejected_sets[2]);
}

TEST_CASE("the draw is the seeded stream's first uniform pick") {
  const auto c = twenty_dialogue_fixture();
  const auto& t = OppositeTable::standard();
  const auto r = build_epoch(c, Split::train, 1, 99, t);
  const auto groups = group_by_emotion(c, Split::train);
  for (const auto& ex : r.examples) {
    const auto& group = groups[index_of(ex.opposite_emotion)];
    // Independent re-derivation of the stream key and draw.
    const std::uint64_t key = rng::derive(rng::derive(99, 1), rng::hash_string(ex.dialogue_id));
    CHECK(ex.seed == key);
    rng::Stream s(key);
    CHECK(ex.rejected_source_id == group[static_cast<std::size_t>(s.uniform(group.size()))]);
  }
}

TEST_CASE("invariants on a synthetic corpus, serial equals parallel") {
  std::istringstream in(testing::synthetic_raw_csv({.dialogues = 2000, .seed = 11}));
  const auto c = import_raw(in, ImportOptions{});
  const auto& t = OppositeTable::standard();
  const auto serial = build_epoch(c, Split::train, 0, 5, t, Exec::serial);
  const auto parallel = build_epoch(c, Split::train, 0, 5, t, Exec::parallel);
  CHECK(serial.examples == parallel.examples);
  CHECK(dump(serial.examples) == dump(parallel.examples));

  std::size_t with_target = 0;
  for (const auto& d : c.dialogues()) with_target += d.has_target() ? 1 : 0;
  CHECK(serial.examples.size() == with_target);
  CHECK(serial.summary.skipped_no_target == c.size() - with_target);

  for (const auto& ex : serial.examples) {
    const auto& src = c.at(ex.dialogue_id);
    const auto& rej = c.at(ex.rejected_source_id);
    CHECK(ex.opposite_emotion == t.opposite_of(src.emotion));
    CHECK(rej.emotion == ex.opposite_emotion);
    CHECK(rej.split == src.split);
    CHECK(ex.chosen == last_response_target(src)->target.text);
    CHECK(ex.rejected == last_response_target(rej)->target.text);
    CHECK(ex.chosen != ex.rejected);
  }
}

TEST_CASE("empty opposite group is an error naming the label") {
  const auto c = import_rows(conversation("A", "afraid", {"x", "y"}));
  try {
    build_epoch(c, Split::train, 0, 1, OppositeTable::standard());
    FAIL("expected PreferenceError");
  } catch (const PreferenceError& e) {
    CHECK(std::string(e.what()).find("angry") != std::string::npos);
  }
}

TEST_CASE("rejected is drawn from the same split only") {
  auto train = import_rows(conversation("A", "afraid", {"x", "y"}), Split::train);
  auto test = import_rows(conversation("B", "angry", {"p", "q"}), Split::test);
  const auto c = merge({train, test});
  CHECK_THROWS_AS(build_epoch(c, Split::train, 0, 1, OppositeTable::standard()), PreferenceError);
}

TEST_CASE("string collisions are redrawn once, then tallied") {
  auto rows = conversation("A", "afraid", {"x", "same reply"});
  auto b = conversation("B", "angry", {"p", "same reply"});
  rows.insert(rows.end(), b.begin(), b.end());
  const auto r = build_epoch(import_rows(rows), Split::train, 0, 3, OppositeTable::standard());
  CHECK(r.summary.redraws == 2);
  CHECK(r.summary.unresolved_collisions == std::vector<std::string>{"A", "B"});
  CHECK(r.examples.size() == 2);
}

TEST_CASE("serialization schema") {
  const auto c = two_dialogue_fixture();
  auto ex = build_epoch(c, Split::train, 0, 42, OppositeTable::standard()).examples;
  ex.resize(1);
  std::ostringstream out;
  serialize_preferences(ex, out, std::string("You are kind."));
  const std::string s = out.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 1);
  const auto j = nlohmann::ordered_json::parse(s);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"dialogue_id", "epoch", "seed", "emotion", "opposite_emotion",
                                         "rejected_source_id", "system", "context", "chosen", "rejected"});
  CHECK(j["context"][0]["role"] == "user");
  CHECK(j["system"] == "You are kind.");

  std::istringstream in(s);
  const auto back = read_preferences(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == ex[0]);

  std::ostringstream empty;
  serialize_preferences({}, empty);
  CHECK(empty.str().empty());

  std::ostringstream bad;
  bad.setstate(std::ios::badbit);
  CHECK_THROWS(serialize_preferences(ex, bad));
}

TEST_CASE("listener context turns map to assistant") {
  std::vector<PreferenceExample> ex(1);
  ex[0].dialogue_id = "x";
  ex[0].context = {Turn{1, Role::speaker, "a"}, Turn{2, Role::listener, "b"}, Turn{3, Role::speaker, "c"}};
  std::ostringstream out;
  serialize_preferences(ex, out);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["context"][1]["role"] == "assistant");
  CHECK_FALSE(j.contains("system"));
}
