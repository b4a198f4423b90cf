#include "idic/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <thread>

#include "idic/errors.hpp"
#include "idic/example_pool.hpp"

namespace idic {

std::string to_string(IntentBackendKind v) {
  switch (v) {
    case IntentBackendKind::oracle: return "oracle";
    case IntentBackendKind::model: return "model";
    case IntentBackendKind::off: return "off";
  }
  return "off";
}

std::string to_string(RetrievalMode v) {
  switch (v) {
    case RetrievalMode::intent_masked: return "intent_masked";
    case RetrievalMode::unmasked_context: return "unmasked_context";
    case RetrievalMode::off: return "off";
  }
  return "off";
}

std::string to_string(EmbeddingKind v) {
  return v == EmbeddingKind::lexical ? "lexical" : "remote";
}

std::string to_string(LlmKind v) {
  switch (v) {
    case LlmKind::remote: return "remote";
    case LlmKind::replay: return "replay";
    case LlmKind::oracle: return "oracle";
  }
  return "oracle";
}

IntentBackendKind parse_intent_backend(std::string_view text) {
  if (text == "oracle") return IntentBackendKind::oracle;
  if (text == "model") return IntentBackendKind::model;
  if (text == "off") return IntentBackendKind::off;
  throw ConfigError("intent backend must be oracle|model|off, got '" + std::string(text) + "'");
}

RetrievalMode parse_retrieval_mode(std::string_view text) {
  if (text == "intent_masked") return RetrievalMode::intent_masked;
  if (text == "unmasked_context") return RetrievalMode::unmasked_context;
  if (text == "off") return RetrievalMode::off;
  throw ConfigError("retrieval mode must be intent_masked|unmasked_context|off, got '" +
                    std::string(text) + "'");
}

EmbeddingKind parse_embedding_kind(std::string_view text) {
  if (text == "lexical") return EmbeddingKind::lexical;
  if (text == "remote") return EmbeddingKind::remote;
  throw ConfigError("embedding provider must be lexical|remote, got '" + std::string(text) + "'");
}

LlmKind parse_llm_kind(std::string_view text) {
  if (text == "remote") return LlmKind::remote;
  if (text == "replay") return LlmKind::replay;
  if (text == "oracle") return LlmKind::oracle;
  throw ConfigError("llm backend must be remote|replay|oracle, got '" + std::string(text) + "'");
}

nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["intent_backend"] = to_string(c.intent_backend);
  j["retrieval_mode"] = to_string(c.retrieval_mode);
  j["k"] = c.k;
  j["embedding_provider"] = to_string(c.embedding_provider);
  j["llm_backend"] = to_string(c.llm_backend);
  j["prompt_budget"] = c.prompt_budget;
  j["seed"] = c.seed;
  j["gold_threading"] = c.gold_threading;
  return j;
}

Tracker::Tracker(PipelineConfig config, Schema schema, std::vector<RetrievalExample> pool,
                 PipelineServices services)
    : config_(config),
      schema_(std::move(schema)),
      ddl_(schema_to_ddl(schema_)),
      pool_(std::move(pool)),
      services_(services) {
  if (config_.k < 0) throw ConfigError("k must be >= 0");
  if (!services_.llm) throw ConfigError("tracker needs a completion backend");
  if (config_.intent_backend == IntentBackendKind::model && !services_.nlu) {
    throw ConfigError("intent backend 'model' needs an NLU client");
  }
  if (config_.retrieval_mode != RetrievalMode::off && config_.k > 0) {
    if (!services_.embedder) throw ConfigError("retrieval needs an embedding provider");
    if (pool_.empty()) throw EmptyPool();
    index_ = index_pool(pool_, *services_.embedder,
                        config_.retrieval_mode == RetrievalMode::intent_masked
                            ? QueryField::masked
                            : QueryField::context);
  }
}

DialogueResult Tracker::track_dialogue(const Dialogue& dialogue) const {
  DialogueResult out;
  out.dialogue_id = dialogue.dialogue_id;
  DialogueState predicted;
  const DialogueState empty;

  for (std::size_t t = 0; t < dialogue.turns.size(); ++t) {
    const DialogueTurn& turn = dialogue.turns[t];
    const DialogueState& gold_prev = t == 0 ? empty : dialogue.turns[t - 1].gold_state;
    const DialogueState& prev = config_.gold_threading ? gold_prev : predicted;

    TurnResult result;
    result.dialogue_id = dialogue.dialogue_id;
    result.turn_index = turn.turn_index;
    result.gold_state = turn.gold_state;

    try {
      DialogueInformation info = make_dialogue_information(dialogue, t, prev);
      AugmentedDialogueInformation aug{info, std::nullopt};
      switch (config_.intent_backend) {
        case IntentBackendKind::oracle:
          aug.intent = oracle_intent(gold_prev, turn.gold_state);
          break;
        case IntentBackendKind::model: {
          ModelIntentResult r = services_.nlu->model_intent(info);
          aug.intent = std::move(r.intent);
          result.intent_error = std::move(r.decode_error);
          break;
        }
        case IntentBackendKind::off:
          break;
      }

      std::vector<ScoredExample> examples;
      if (config_.retrieval_mode != RetrievalMode::off && config_.k > 0) {
        const std::string query = config_.retrieval_mode == RetrievalMode::intent_masked
                                      ? serialize_masked(mask(aug))
                                      : serialize_context({info, std::nullopt});
        examples = retrieve_top_k(pool_, index_, services_.embedder->embed(query),
                                  static_cast<std::size_t>(config_.k),
                                  ExampleSource{dialogue.dialogue_id, turn.turn_index});
      }

      Prompt prompt = build_prompt_within_budget(ddl_, examples, aug, config_.prompt_budget);
      result.prompt_stats = {prompt.example_count, prompt.token_estimate, prompt.text.size()};

      CompletionRequest request;
      request.prompt = std::move(prompt.text);
      request.metadata["dialogue_id"] = dialogue.dialogue_id;
      request.metadata["turn_index"] = std::to_string(turn.turn_index);
      CompletionResult completion = services_.llm->complete(request);

      ParsedSql parsed = parse_sql(completion.text, schema_);
      result.parse_status = parsed.status;
      result.parse_tier = parsed.tier;
      if (parsed.error) {
        result.parse_error = to_string(parsed.error->kind) + ": " + parsed.error->message;
      } else {
        result.predicted_delta = std::move(parsed.where_pairs);
      }
    } catch (const Error& e) {
      out.aborted = true;
      out.abort_reason = "turn " + std::to_string(turn.turn_index) + ": " + e.what();
      return out;
    }

    result.predicted_state = apply_delta(prev, result.predicted_delta);
    predicted = result.predicted_state;
    out.turns.push_back(std::move(result));
  }
  return out;
}

double joint_goal_accuracy(std::span<const TurnResult> results) {
  if (results.empty()) throw EmptyResults();
  std::size_t exact = 0;
  for (const auto& r : results) exact += r.predicted_state == r.gold_state ? 1 : 0;
  return static_cast<double>(exact) / static_cast<double>(results.size());
}

SlotPrf slot_prf(std::span<const TurnResult> results) {
  if (results.empty()) throw EmptyResults();
  std::size_t predicted = 0, gold = 0, correct = 0;
  for (const auto& r : results) {
    predicted += r.predicted_state.size();
    gold += r.gold_state.size();
    for (const auto& [k, v] : r.predicted_state.entries()) {
      const std::string* g = r.gold_state.find(k);
      if (g && *g == v) ++correct;
    }
  }
  if (predicted == 0 && gold == 0) return {1.0, 1.0, 1.0};
  SlotPrf out;
  out.precision = predicted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(predicted);
  out.recall = gold == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold);
  // Same value as 2PR/(P+R), with a single rounding.
  out.f1 = static_cast<double>(2 * correct) / static_cast<double>(predicted + gold);
  return out;
}

std::vector<TurnResult> flatten(std::span<const DialogueResult> results) {
  std::vector<TurnResult> out;
  for (const auto& d : results) out.insert(out.end(), d.turns.begin(), d.turns.end());
  return out;
}

EvalReport make_report(std::span<const DialogueResult> results, const PipelineConfig& config) {
  EvalReport report;
  report.config = config;
  const std::vector<TurnResult> turns = flatten(results);
  for (const auto& d : results) report.aborted_dialogues += d.aborted ? 1 : 0;
  report.turn_count = turns.size();
  if (turns.empty()) return report;

  report.jga = joint_goal_accuracy(turns);
  report.slots = slot_prf(turns);

  std::map<std::string, std::pair<std::size_t, std::size_t>> domain_counts;  // exact, seen
  for (const auto& t : turns) {
    switch (t.parse_status) {
      case ParseStatus::ok: ++report.parse_ok; break;
      case ParseStatus::sentinel: ++report.parse_sentinel; break;
      case ParseStatus::error: ++report.parse_error; break;
    }
    if (t.parse_status != ParseStatus::error) ++report.tier_counts[to_string(t.parse_tier)];
    if (t.intent_error) ++report.intent_decode_errors;

    std::set<std::string> domains;
    for (const auto& [k, _] : t.gold_state.entries()) domains.insert(k.domain);
    for (const auto& [k, _] : t.predicted_state.entries()) domains.insert(k.domain);
    for (const auto& d : domains) {
      auto& [exact, seen] = domain_counts[d];
      ++seen;
      if (t.predicted_state.domain_view(d) == t.gold_state.domain_view(d)) ++exact;
    }
  }
  for (const auto& [d, c] : domain_counts) {
    report.per_domain_jga[d] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  report.parser_error_rate =
      static_cast<double>(report.parse_error) / static_cast<double>(report.turn_count);
  return report;
}

EvalRun evaluate(const Tracker& tracker, const DialogueDataset& dataset) {
  std::vector<const Dialogue*> order;
  order.reserve(dataset.dialogues.size());
  for (const auto& d : dataset.dialogues) order.push_back(&d);
  std::sort(order.begin(), order.end(),
            [](const Dialogue* a, const Dialogue* b) { return a->dialogue_id < b->dialogue_id; });

  EvalRun run;
  run.dialogues.resize(order.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      run.dialogues[i] = tracker.track_dialogue(*order[i]);
    }
  };
  const int workers = std::clamp(tracker.config().workers, 1, 64);
  if (workers == 1 || order.size() < 2) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  run.report = make_report(run.dialogues, tracker.config());
  return run;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["config"] = to_json(r.config);
  j["turn_count"] = r.turn_count;
  j["jga"] = r.jga;
  j["slot_precision"] = r.slots.precision;
  j["slot_recall"] = r.slots.recall;
  j["slot_f1"] = r.slots.f1;
  j["per_domain_jga"] = nlohmann::ordered_json::object();
  for (const auto& [d, v] : r.per_domain_jga) j["per_domain_jga"][d] = v;
  j["parser_error_rate"] = r.parser_error_rate;
  j["parse_status"] = {{"ok", r.parse_ok}, {"sentinel", r.parse_sentinel}, {"error", r.parse_error}};
  j["parse_tiers"] = nlohmann::ordered_json::object();
  for (const auto& [t, n] : r.tier_counts) j["parse_tiers"][t] = n;
  j["intent_decode_errors"] = r.intent_decode_errors;
  j["aborted_dialogues"] = r.aborted_dialogues;
  return j;
}

nlohmann::ordered_json to_json(const TurnResult& t) {
  auto pairs = [](const auto& m) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) o[flat_key(k)] = v;
    return o;
  };
  nlohmann::ordered_json j;
  j["dialogue_id"] = t.dialogue_id;
  j["turn"] = t.turn_index;
  j["predicted_delta"] = pairs(t.predicted_delta.pairs());
  j["predicted_state"] = pairs(t.predicted_state.entries());
  j["gold_state"] = pairs(t.gold_state.entries());
  j["parse_status"] = to_string(t.parse_status);
  j["parse_tier"] = to_string(t.parse_tier);
  if (t.parse_error) j["parse_error"] = *t.parse_error;
  if (t.intent_error) j["intent_error"] = *t.intent_error;
  j["prompt_examples"] = t.prompt_stats.example_count;
  j["prompt_tokens"] = t.prompt_stats.token_estimate;
  j["prompt_chars"] = t.prompt_stats.characters;
  return j;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string report_table(const EvalReport& r) {
  std::string out;
  out += pad("turns", 20) + std::to_string(r.turn_count) + "\n";
  out += pad("jga", 20) + fixed4(r.jga) + "\n";
  out += pad("slot precision", 20) + fixed4(r.slots.precision) + "\n";
  out += pad("slot recall", 20) + fixed4(r.slots.recall) + "\n";
  out += pad("slot f1", 20) + fixed4(r.slots.f1) + "\n";
  out += pad("parser error rate", 20) + fixed4(r.parser_error_rate) + "\n";
  for (const auto& [d, v] : r.per_domain_jga) out += pad("jga[" + d + "]", 20) + fixed4(v) + "\n";
  if (r.aborted_dialogues > 0) {
    out += pad("aborted dialogues", 20) + std::to_string(r.aborted_dialogues) + "\n";
  }
  return out;
}

std::string trace_jsonl(std::span<const DialogueResult> results) {
  std::string out;
  for (const auto& d : results) {
    for (const auto& t : d.turns) out += to_json(t).dump() + "\n";
    if (d.aborted) {
      nlohmann::ordered_json j;
      j["dialogue_id"] = d.dialogue_id;
      j["aborted"] = d.abort_reason;
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::vector<PipelineConfig> ablation_configs(const PipelineConfig& base) {
  const IntentBackendKind intent =
      base.intent_backend == IntentBackendKind::off ? IntentBackendKind::oracle : base.intent_backend;
  PipelineConfig plain = base;
  plain.intent_backend = IntentBackendKind::off;
  plain.retrieval_mode = RetrievalMode::unmasked_context;
  PipelineConfig with_intent = base;
  with_intent.intent_backend = intent;
  with_intent.retrieval_mode = RetrievalMode::unmasked_context;
  PipelineConfig full = base;
  full.intent_backend = intent;
  full.retrieval_mode = RetrievalMode::intent_masked;
  return {plain, with_intent, full};
}

std::vector<AblationRow> run_ablation(const PipelineConfig& base, const DialogueDataset& dataset,
                                      const std::vector<RetrievalExample>& pool,
                                      const PipelineServices& services) {
  static const char* kLabels[] = {"w/o intent, context retrieval",
                                  "w/ intent, context retrieval",
                                  "w/ intent, intent-masked retrieval"};
  std::vector<AblationRow> rows;
  auto configs = ablation_configs(base);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    Tracker tracker(configs[i], dataset.schema, pool, services);
    rows.push_back({kLabels[i], evaluate(tracker, dataset).report});
  }
  return rows;
}

std::string ablation_table(std::span<const AblationRow> rows) {
  std::string out = pad("configuration", 38) + pad("jga", 10) + pad("delta", 10) +
                    pad("slot_f1", 10) + "parse_err\n";
  const double base = rows.empty() ? 0.0 : rows.front().report.jga;
  for (const auto& row : rows) {
    const double delta = row.report.jga - base;
    out += pad(row.label, 38) + pad(fixed4(row.report.jga), 10) +
           pad((delta >= 0 ? "+" : "") + fixed4(delta), 10) + pad(fixed4(row.report.slots.f1), 10) +
           fixed4(row.report.parser_error_rate) + "\n";
  }
  return out;
}

nlohmann::ordered_json to_json(std::span<const AblationRow> rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  const double base = rows.empty() ? 0.0 : rows.front().report.jga;
  for (const auto& row : rows) {
    nlohmann::ordered_json r;
    r["label"] = row.label;
    r["jga_delta"] = row.report.jga - base;
    r["report"] = to_json(row.report);
    j.push_back(std::move(r));
  }
  return j;
}

std::map<ExampleSource, StateChange> gold_lookup(const DialogueDataset& dataset) {
  std::map<ExampleSource, StateChange> out;
  for (const auto& d : dataset.dialogues) {
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      out.emplace(ExampleSource{d.dialogue_id, d.turns[t].turn_index}, gold_delta(d, t));
    }
  }
  return out;
}

}  // namespace idic
