#include <doctest.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "idic/errors.hpp"
#include "idic/sql_codec.hpp"
#include "synthetic.hpp"

using namespace idic;

namespace {

const Schema& schema() { return default_multiwoz_schema(); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A worked example: one retrieved example for attraction-area=centre and
// a current turn asking for a south-area attraction.
Prompt worked_example_prompt() {
  ScoredExample example;
  example.example.source = {"PMUL4648.json", 0};
  example.example.state_change = StateChange{{{"attraction", "area"}, "centre"}};
  example.example.prompt_block = render_example_block(
      "[CONTEXT] { attraction area: centre } [SYS]  [USER] I want a attraction in the centre area. [DOMAIN] attraction",
      example.example.state_change, schema());
  example.score = 0.9;
  DialogueInformation info;
  info.active_domains = {"attraction"};
  info.user_utterance = "i an looking for a south area attraction.";
  auto current = augment(info, Intent{"inform", {{{"attraction", "area"}, "south"}}});
  std::vector<ScoredExample> examples = {example};
  return build_prompt(schema_to_ddl(schema()), examples, current);
}

}  // namespace

TEST_SUITE("sql_codec") {
  TEST_CASE("ddl rendering") {
    Schema s({"attraction"}, {{"attraction", {"area", "type"}}});
    CHECK(schema_to_ddl(s).ddl == "CREATE TABLE attraction(area text, type text);");
    CHECK(schema_to_ddl(Schema{}).ddl.empty());
    const std::string ddl = schema_to_ddl(schema()).ddl;
    std::size_t tables = 0;
    for (auto at = ddl.find("CREATE TABLE"); at != std::string::npos; at = ddl.find("CREATE TABLE", at + 1)) ++tables;
    CHECK(tables == 7);
  }

  TEST_CASE("encoding") {
    CHECK(encode_delta_as_sql({{{"attraction", "area"}, "south"}}, schema()) ==
          "SELECT * FROM attraction AS d1 WHERE d1.area = 'south';");
    CHECK(encode_delta_as_sql({}, schema()) == "SELECT * FROM none;");
    CHECK(encode_delta_as_sql({{{"hotel", "area"}, "south"}, {{"train", "day"}, "monday"}}, schema()) ==
          "SELECT * FROM hotel AS d1, train AS d2 WHERE d1.area = 'south' AND d2.day = 'monday';");
    CHECK(encode_delta_as_sql({{{"attraction", "name"}, "king's college"}}, schema()) ==
          "SELECT * FROM attraction AS d1 WHERE d1.name = 'king''s college';");
    CHECK_THROWS_AS(encode_delta_as_sql({{{"bus", "day"}, "monday"}}, schema()), SchemaViolation);
  }

  TEST_CASE("parsing the encoder's output and the sentinel") {
    auto p = parse_sql("SELECT * FROM attraction AS d1 WHERE d1.area = 'south';", schema());
    CHECK(p.status == ParseStatus::ok);
    CHECK(p.tier == ParseTier::exact);
    CHECK(p.where_pairs == StateChange{{{"attraction", "area"}, "south"}});
    auto none = parse_sql("SELECT * FROM none;", schema());
    CHECK(none.status == ParseStatus::sentinel);
    CHECK(none.where_pairs.empty());
  }

  TEST_CASE("junk around the statement and bare slots") {
    auto p = parse_sql("the answer is SELECT * FROM hotel WHERE area = 'centre'; thanks!", schema());
    CHECK(p.status == ParseStatus::ok);
    CHECK(p.tier == ParseTier::junk_stripped);
    CHECK(p.where_pairs == StateChange{{{"hotel", "area"}, "centre"}});
    auto bare = parse_sql("SELECT * FROM hotel WHERE area = 'Center'", schema());
    CHECK(bare.tier == ParseTier::bare_slot);
    CHECK(bare.where_pairs == StateChange{{{"hotel", "area"}, "centre"}});
  }

  TEST_CASE("parse errors carry a kind and never throw") {
    auto unknown_domain = parse_sql("SELECT * FROM bus AS d1 WHERE d1.day = 'monday';", schema());
    CHECK(unknown_domain.status == ParseStatus::error);
    CHECK(unknown_domain.error->kind == SqlErrorKind::unknown_domain);
    auto unknown_slot = parse_sql("SELECT * FROM hotel AS d1 WHERE d1.colour = 'red';", schema());
    CHECK(unknown_slot.error->kind == SqlErrorKind::unknown_slot);
    auto ambiguous = parse_sql("SELECT * FROM hotel AS d1, train AS d2 WHERE day = 'monday';", schema());
    CHECK(ambiguous.error->kind == SqlErrorKind::ambiguous_bare_slot);
    auto nothing = parse_sql("no sql here", schema());
    CHECK(nothing.status == ParseStatus::error);
    CHECK(nothing.where_pairs.empty());
  }

  TEST_CASE("round trip over random deltas") {
    DeterministicRng rng(1234);
    for (int i = 0; i < 500; ++i) {
      StateChange d = testing::random_state_change(rng, schema());
      auto p = parse_sql(encode_delta_as_sql(d, schema()), schema());
      REQUIRE(p.status == ParseStatus::ok);
      CHECK(p.where_pairs == d);
    }
  }

  TEST_CASE("random bytes never crash the parser") {
    DeterministicRng rng(77);
    const std::string pieces[] = {"SELECT", " * ", "FROM", " hotel", " AS ", "d1", " WHERE ", "d1.area",
                                  " = ", "'", "\"", "`", ";", " AND ", ",", "none", "\n"};
    for (int i = 0; i < 2000; ++i) {
      std::string s;
      const auto n = rng.below(40);
      for (std::uint64_t j = 0; j < n; ++j) {
        if (rng.unit() < 0.5) {
          s += pieces[rng.below(std::size(pieces))];
        } else {
          s.push_back(static_cast<char>(rng.below(256)));
        }
      }
      CHECK_NOTHROW(parse_sql(s, schema()));
    }
  }

  TEST_CASE("parse time grows linearly") {
    auto time_of = [](const std::string& text) {
      auto start = std::chrono::steady_clock::now();
      for (int i = 0; i < 3; ++i) (void)parse_sql(text, schema());
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    auto build = [](std::size_t n) {
      std::string s = "SELECT * FROM hotel AS d1 WHERE ";
      for (std::size_t i = 0; i < n; ++i) s += "d1.area = 'x''y' AND ";
      s += "d1.area = 'south'; select select '";
      for (std::size_t i = 0; i < n; ++i) s += "select ' '' ";
      return s;
    };
    const double small = time_of(build(2000));
    const double large = time_of(build(16000));
    CHECK(large < 8.0 * small * 4.0 + 0.05);
  }

  TEST_CASE("token estimate is a quarter of the characters, rounded up") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
  }

  TEST_CASE("prompt layout and example counting") {
    DialogueInformation info;
    info.user_utterance = "hello";
    auto current = augment(info, Intent{});
    auto ddl = schema_to_ddl(schema());
    Prompt empty = build_prompt(ddl, {}, current);
    CHECK(empty.example_count == 0);
    CHECK(empty.text == ddl.ddl + "\n" + std::string(kPromptInstruction) + "\n" + serialize_context(current) + "\nSQL:");

    Prompt golden = worked_example_prompt();
    CHECK(golden.example_count == 1);
    CHECK(golden.text.find("SQL: SELECT * FROM attraction AS d1 WHERE d1.area = 'centre';") != std::string::npos);
    CHECK(golden.text == read_file(IDIC_FIXTURE_DIR "/prompt_worked_example.txt"));
    CHECK(golden.token_estimate == estimate_tokens(golden.text));
  }

  TEST_CASE("prompt budget") {
    DialogueInformation info;
    info.user_utterance = "hello";
    auto current = augment(info, Intent{});
    auto ddl = schema_to_ddl(schema());
    std::vector<ScoredExample> many(40);
    for (std::size_t i = 0; i < many.size(); ++i) {
      many[i].example.source = {"D", static_cast<int>(i)};
      many[i].example.prompt_block = std::string(200, 'x') + "\nSQL: SELECT * FROM none;";
    }
    CHECK_THROWS_AS(build_prompt(ddl, many, current, 1000), PromptTooLarge);
    Prompt fitted = build_prompt_within_budget(ddl, many, current, 1000);
    CHECK(fitted.token_estimate <= 1000);
    CHECK(fitted.example_count > 0);
    CHECK(fitted.example_count < 40);
    CHECK_THROWS_AS(build_prompt_within_budget(ddl, many, current, 10), PromptTooLarge);
  }
}
