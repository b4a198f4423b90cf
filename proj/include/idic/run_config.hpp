#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "idic/eval.hpp"
#include "idic/llm_client.hpp"

namespace idic {

// Everything a CLI run needs. Layering: defaults < config file <
// environment (IDIC_LLM_URL, IDIC_EMBED_URL, IDIC_NLU_URL) < flags.
struct RunConfig {
  std::uint64_t seed = 0;

  std::string schema_path;  // empty: built-in MultiWOZ schema
  std::string pool_path;    // canonical JSONL of the few-shot pool
  std::string eval_path;    // canonical JSONL to evaluate

  double fraction = 0.01;

  int k = 10;
  RetrievalMode retrieval_mode = RetrievalMode::intent_masked;
  EmbeddingKind embedding_provider = EmbeddingKind::lexical;
  std::string embed_url;

  IntentBackendKind intent_backend = IntentBackendKind::oracle;
  std::string nlu_url;

  LlmKind llm_backend = LlmKind::oracle;
  std::string llm_url;
  WireDialect llm_dialect = WireDialect::minimal;
  std::string llm_model;
  std::string replay_fixture;
  std::string record_fixture;  // when set, completions are appended here
  int timeout_ms = 30000;
  int retries = 2;
  int max_concurrency = 4;

  int prompt_budget = 3500;

  int workers = 1;
  bool gold_threading = false;

  std::size_t positives_per_anchor = 2;
  std::size_t negatives_per_anchor = 4;
  double negative_threshold = 0.2;

  std::string report_path;
  std::string trace_path;

  PipelineConfig pipeline() const;
  HttpEndpoint llm_endpoint() const;
  HttpEndpoint embed_endpoint() const;
  HttpEndpoint nlu_endpoint() const;
};

// Sets "section.key" (or a top-level key such as "seed") from text.
// Throws ConfigError for unknown keys and unparseable values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

// Grammar, one item per line:
//   # comment
//   [section]
//   key = value        value: bare token or "double-quoted string"
// Keys before the first section header are top-level. Unknown keys,
// duplicate keys and malformed lines are rejected with the line number.
RunConfig parse_run_config(std::string_view text);
void merge_run_config_file(RunConfig& config, const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
void apply_environment(RunConfig& config, const EnvLookup& lookup);
void apply_environment(RunConfig& config);

// Renders the config in the file grammar; parse_run_config of the result
// gives back an equal config.
std::string to_text(const RunConfig& config);

}  // namespace idic
