#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "idic/dataset.hpp"
#include "idic/embedding.hpp"
#include "idic/intent.hpp"
#include "idic/llm_client.hpp"
#include "idic/retrieval.hpp"
#include "idic/sql_codec.hpp"

namespace idic {

enum class IntentBackendKind { oracle, model, off };
enum class RetrievalMode { intent_masked, unmasked_context, off };
enum class EmbeddingKind { lexical, remote };
enum class LlmKind { remote, replay, oracle };

std::string to_string(IntentBackendKind v);
std::string to_string(RetrievalMode v);
std::string to_string(EmbeddingKind v);
std::string to_string(LlmKind v);
IntentBackendKind parse_intent_backend(std::string_view text);
RetrievalMode parse_retrieval_mode(std::string_view text);
EmbeddingKind parse_embedding_kind(std::string_view text);
LlmKind parse_llm_kind(std::string_view text);

struct PipelineConfig {
  IntentBackendKind intent_backend = IntentBackendKind::oracle;
  RetrievalMode retrieval_mode = RetrievalMode::intent_masked;
  int k = 10;
  EmbeddingKind embedding_provider = EmbeddingKind::lexical;
  LlmKind llm_backend = LlmKind::oracle;
  int prompt_budget = kDefaultPromptBudget;
  std::uint64_t seed = 0;
  bool gold_threading = false;  // feed gold instead of predicted B_{t-1} (diagnostics)
  int workers = 1;

  bool operator==(const PipelineConfig&) const = default;
};

nlohmann::ordered_json to_json(const PipelineConfig& config);

// Non-owning; the pointed-to services must outlive the tracker. `nlu` is
// only consulted with intent_backend == model.
struct PipelineServices {
  const CompletionBackend* llm = nullptr;
  const EmbeddingProvider* embedder = nullptr;
  const NluClient* nlu = nullptr;
};

struct PromptStats {
  int example_count = 0;
  int token_estimate = 0;
  std::size_t characters = 0;
};

struct TurnResult {
  std::string dialogue_id;
  int turn_index = 0;
  StateChange predicted_delta;
  DialogueState predicted_state;
  DialogueState gold_state;
  ParseStatus parse_status = ParseStatus::ok;
  ParseTier parse_tier = ParseTier::exact;
  std::optional<std::string> parse_error;
  std::optional<std::string> intent_error;
  PromptStats prompt_stats;
};

struct DialogueResult {
  std::string dialogue_id;
  std::vector<TurnResult> turns;
  bool aborted = false;  // a remote call failed; `turns` holds the completed prefix
  std::string abort_reason;
};

// Runs the per-turn loop: build D_t from the threaded state, obtain the
// intent, augment, retrieve examples, prompt, complete, parse, apply.
class Tracker {
 public:
  // Embeds the pool once for the configured retrieval mode.
  Tracker(PipelineConfig config, Schema schema, std::vector<RetrievalExample> pool,
          PipelineServices services);

  const PipelineConfig& config() const noexcept { return config_; }

  DialogueResult track_dialogue(const Dialogue& dialogue) const;

 private:
  PipelineConfig config_;
  Schema schema_;
  SqlSchemaText ddl_;
  std::vector<RetrievalExample> pool_;
  EmbeddingIndex index_;
  PipelineServices services_;
};

struct SlotPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Share of turns whose predicted state equals gold exactly. Throws
// EmptyResults.
double joint_goal_accuracy(std::span<const TurnResult> results);

// Micro-averaged over (turn, domain-slot, value) triples. Both sides empty
// overall scores (1, 1, 1). Throws EmptyResults.
SlotPrf slot_prf(std::span<const TurnResult> results);

struct EvalReport {
  double jga = 0.0;
  SlotPrf slots;
  // Per domain, over turns where gold or prediction mentions the domain.
  std::map<std::string, double> per_domain_jga;
  double parser_error_rate = 0.0;
  std::size_t turn_count = 0;
  std::size_t parse_ok = 0;
  std::size_t parse_sentinel = 0;
  std::size_t parse_error = 0;
  std::map<std::string, std::size_t> tier_counts;
  std::size_t intent_decode_errors = 0;
  std::size_t aborted_dialogues = 0;
  PipelineConfig config;
};

std::vector<TurnResult> flatten(std::span<const DialogueResult> results);
EvalReport make_report(std::span<const DialogueResult> results, const PipelineConfig& config);

struct EvalRun {
  std::vector<DialogueResult> dialogues;  // ordered by dialogue_id
  EvalReport report;
};

// Tracks every dialogue, up to config.workers at a time. Output order and
// bytes do not depend on the worker count.
EvalRun evaluate(const Tracker& tracker, const DialogueDataset& dataset);

nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const TurnResult& turn);
std::string report_table(const EvalReport& report);
// One TurnResult per line.
std::string trace_jsonl(std::span<const DialogueResult> results);

struct AblationRow {
  std::string label;
  EvalReport report;
};

// Three rows: no intent + unmasked-context retrieval; intent + unmasked
// context retrieval; intent + intent-masked retrieval.
std::vector<PipelineConfig> ablation_configs(const PipelineConfig& base);
std::vector<AblationRow> run_ablation(const PipelineConfig& base, const DialogueDataset& dataset,
                                      const std::vector<RetrievalExample>& pool,
                                      const PipelineServices& services);
std::string ablation_table(std::span<const AblationRow> rows);
nlohmann::ordered_json to_json(std::span<const AblationRow> rows);

// Gold deltas of every turn, keyed for the oracle backend.
std::map<ExampleSource, StateChange> gold_lookup(const DialogueDataset& dataset);

}  // namespace idic
