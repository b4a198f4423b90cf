#include <doctest.h>

#include <map>

#include "idic/errors.hpp"
#include "idic/run_config.hpp"

using namespace idic;

TEST_SUITE("run_config") {
  TEST_CASE("sections, comments and quoted values") {
    RunConfig c = parse_run_config(R"(
# top-level keys come first
seed = 7

[data]
pool = "tests/fixtures/pool60.jsonl"   # trailing comment
eval = tests/fixtures/eval20.jsonl

[retrieval]
k = 5
mode = unmasked_context

[llm]
backend = replay
replay_fixture = "a \"quoted\" path.jsonl"
dialect = openai

[eval]
gold_threading = true
)");
    CHECK(c.seed == 7);
    CHECK(c.pool_path == "tests/fixtures/pool60.jsonl");
    CHECK(c.eval_path == "tests/fixtures/eval20.jsonl");
    CHECK(c.k == 5);
    CHECK(c.retrieval_mode == RetrievalMode::unmasked_context);
    CHECK(c.llm_backend == LlmKind::replay);
    CHECK(c.replay_fixture == "a \"quoted\" path.jsonl");
    CHECK(c.llm_dialect == WireDialect::openai_completions);
    CHECK(c.gold_threading);
    CHECK(c.fraction == 0.01);
  }

  TEST_CASE("unknown keys, duplicates and bad values are rejected with a line number") {
    auto message = [](const char* text) {
      try {
        parse_run_config(text);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string("no error");
    };
    CHECK(message("[data]\ncolour = red\n").find("line 2") != std::string::npos);
    CHECK(message("[data]\ncolour = red\n").find("data.colour") != std::string::npos);
    CHECK(message("[retrieval]\nk = 1\nk = 2\n").find("duplicate") != std::string::npos);
    CHECK(message("[retrieval]\nk = ten\n").find("line 2") != std::string::npos);
    CHECK(message("[llm]\nbackend = gpt\n") != "no error");
    CHECK(message("[llm\n") != "no error");
    CHECK(message("just words\n") != "no error");
    CHECK(message("[eval]\ngold_threading = yes\n") != "no error");
  }

  TEST_CASE("rendered text parses back to the same config") {
    RunConfig c;
    c.seed = 99;
    c.pool_path = "p \"q\".jsonl";
    c.fraction = 0.125;
    c.llm_backend = LlmKind::remote;
    c.llm_url = "http://localhost:8000";
    c.negative_threshold = 0.3;
    RunConfig back = parse_run_config(to_text(c));
    CHECK(to_text(back) == to_text(c));
    CHECK(back.pool_path == c.pool_path);
    CHECK(back.fraction == c.fraction);
  }

  TEST_CASE("environment overrides file values") {
    RunConfig c = parse_run_config("[llm]\nurl = http://file\n");
    std::map<std::string, std::string> env = {{"IDIC_LLM_URL", "http://env"}, {"IDIC_EMBED_URL", "http://embed"}};
    apply_environment(c, [&](const char* name) -> std::optional<std::string> {
      auto it = env.find(name);
      if (it == env.end()) return std::nullopt;
      return it->second;
    });
    CHECK(c.llm_url == "http://env");
    CHECK(c.embed_url == "http://embed");
    CHECK(c.nlu_url.empty());
  }

  TEST_CASE("pipeline view carries the retrieval settings") {
    RunConfig c;
    c.k = 3;
    c.retrieval_mode = RetrievalMode::off;
    c.workers = 2;
    PipelineConfig p = c.pipeline();
    CHECK(p.k == 3);
    CHECK(p.retrieval_mode == RetrievalMode::off);
    CHECK(p.workers == 2);
  }
}
