#include <doctest.h>

#include <cmath>
#include <sstream>

#include "idic/dataset.hpp"
#include "idic/errors.hpp"
#include "idic/example_pool.hpp"
#include "synthetic.hpp"

using namespace idic;

namespace {

const Schema& schema() { return default_multiwoz_schema(); }

DialogueDataset mini() {
  return load_multiwoz(IDIC_FIXTURE_DIR "/mini_multiwoz.json", schema());
}

std::string jsonl(const DialogueDataset& d) {
  std::ostringstream out;
  write_canonical_jsonl(d, out);
  return out.str();
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("two-turn dialogue: empty then attraction-area") {
    const std::string data = R"({"D1.json": {"log": [
      {"text": "hi", "metadata": {}},
      {"text": "hello", "metadata": {"attraction": {"book": {"booked": []}, "semi": {"area": "", "name": "not mentioned", "type": ""}}}},
      {"text": "something in the south", "metadata": {}},
      {"text": "sure", "metadata": {"attraction": {"book": {"booked": []}, "semi": {"area": "south", "name": "not mentioned", "type": ""}}}}
    ]}})";
    DialogueDataset d = parse_multiwoz(data, schema());
    REQUIRE(d.dialogues.size() == 1);
    const auto& turns = d.dialogues[0].turns;
    REQUIRE(turns.size() == 2);
    CHECK(turns[0].gold_state.empty());
    CHECK(turns[1].gold_state == DialogueState{{{"attraction", "area"}, "south"}});
    CHECK(turns[1].system_utterance == "hello");
    CHECK(turns[1].active_domains == std::vector<std::string>{"attraction"});
  }

  TEST_CASE("empty log is a format error") {
    CHECK_THROWS_AS(parse_multiwoz(R"({"D1.json": {"log": []}})", schema()), FormatError);
  }

  TEST_CASE("unknown slots name the dialogue") {
    const std::string data = R"({"BAD7.json": {"log": [
      {"text": "hi", "metadata": {}},
      {"text": "ok", "metadata": {"hotel": {"semi": {"colour": "red"}}}}]}})";
    try {
      parse_multiwoz(data, schema());
      FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
      CHECK(std::string(e.what()).find("BAD7.json") != std::string::npos);
    }
  }

  TEST_CASE("mini fixture: not mentioned omitted, synonyms and booking slots") {
    DialogueDataset d = mini();
    REQUIRE(d.dialogues.size() == 3);
    const Dialogue* p = d.find("PMUL0001.json");
    REQUIRE(p != nullptr);
    CHECK(p->turns[0].gold_state == DialogueState{{{"hotel", "area"}, "centre"}, {{"hotel", "pricerange"}, "cheap"}});
    CHECK(p->turns[1].gold_state.find({"hotel", "type"}) != nullptr);
    CHECK(*p->turns[1].gold_state.find({"hotel", "type"}) == "guest house");
    CHECK(*p->turns[2].gold_state.find({"hotel", "book_stay"}) == "3");
    CHECK(p->turns[0].gold_state.find({"hotel", "name"}) == nullptr);
    const Dialogue* s = d.find("SNG0002.json");
    CHECK(*s->turns[1].gold_state.find({"train", "arriveby"}) == "9:45");
    // A turn without changes keeps the previous turn's domains.
    CHECK(p->turns[3].active_domains == std::vector<std::string>{"hotel"});
  }

  TEST_CASE("split lists filter dialogues") {
    MultiwozLoadOptions options;
    options.dev_list = IDIC_FIXTURE_DIR "/mini_devlist.txt";
    options.test_list = IDIC_FIXTURE_DIR "/mini_testlist.txt";
    options.split = Split::test;
    auto test = load_multiwoz(IDIC_FIXTURE_DIR "/mini_multiwoz.json", schema(), options);
    REQUIRE(test.dialogues.size() == 1);
    CHECK(test.dialogues[0].dialogue_id == "SNG0002.json");
    options.split = Split::train;
    auto train = load_multiwoz(IDIC_FIXTURE_DIR "/mini_multiwoz.json", schema(), options);
    REQUIRE(train.dialogues.size() == 1);
    CHECK(train.dialogues[0].dialogue_id == "PMUL0001.json");
  }

  TEST_CASE("canonical JSONL round trip is lossless and byte-stable") {
    DialogueDataset d = mini();
    std::string text = jsonl(d);
    std::istringstream in(text + "\n\n");
    DialogueDataset back = read_canonical_jsonl(in, schema());
    CHECK(back == d);
    CHECK(jsonl(back) == text);
  }

  TEST_CASE("unknown field is rejected with the line number") {
    std::string text = jsonl(mini());
    auto second = text.find('\n') + 1;
    text.insert(second + 1, "\"extra\":1,");
    std::istringstream in(text);
    try {
      read_canonical_jsonl(in, schema());
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  TEST_CASE("duplicate dialogue ids are rejected") {
    std::string line = jsonl(mini()).substr(0, jsonl(mini()).find('\n') + 1);
    std::istringstream in(line + line);
    CHECK_THROWS_AS(read_canonical_jsonl(in, schema()), FormatError);
  }

  TEST_CASE("few-shot sampling size, identity and determinism") {
    testing::SyntheticOptions o;
    o.dialogues = 300;
    o.min_turns = 1;
    o.max_turns = 2;
    DialogueDataset big = testing::synthetic_dataset(schema(), o);
    CHECK(sample_fewshot(big, 1.0, 3) == big);
    auto a = sample_fewshot(big, 0.01, 7);
    CHECK(a.dialogues.size() == 3);
    CHECK(sample_fewshot(big, 0.01, 7) == a);
    CHECK(sample_fewshot(big, 0.1, 7).dialogues.size() == 30);
    CHECK_THROWS_AS(sample_fewshot(big, 0.0, 7), ConfigError);
    CHECK_THROWS_AS(sample_fewshot(big, 1.5, 7), ConfigError);
  }

  TEST_CASE("1% of 10,438 dialogues is 105") {
    DialogueDataset big;
    big.schema = schema();
    for (int i = 0; i < 10438; ++i) {
      Dialogue d;
      d.dialogue_id = "D" + std::to_string(100000 + i);
      DialogueTurn t;
      t.user_utterance = "hi";
      d.turns.push_back(t);
      big.dialogues.push_back(std::move(d));
    }
    CHECK(sample_fewshot(big, 0.01, 1).dialogues.size() ==
          static_cast<std::size_t>(std::ceil(0.01 * 10438)));
  }

  TEST_CASE("example pool: one example per turn, empty changes kept") {
    DialogueDataset d = mini();
    auto pool = build_example_pool(d);
    CHECK(pool.size() == d.turn_count());
    bool has_empty = false;
    for (const auto& e : pool) has_empty = has_empty || e.state_change.empty();
    CHECK(has_empty);
    CHECK(build_example_pool(DialogueDataset{}).empty());

    DialogueDataset one;
    one.schema = schema();
    one.dialogues.push_back(d.find("MUL0003.json") ? *d.find("MUL0003.json") : Dialogue{});
    CHECK(build_example_pool(one).size() == 3);
  }

  TEST_CASE("gold deltas are the state differences") {
    DialogueDataset d = mini();
    const Dialogue& m = *d.find("MUL0003.json");
    CHECK(gold_delta(m, 2) == StateChange{{{"restaurant", "pricerange"}, "expensive"}});
    CHECK(gold_delta(m, 0) == StateChange{{{"restaurant", "food"}, "italian"},
                                          {{"restaurant", "pricerange"}, "dontcare"}});
  }
}
