#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <unistd.h>

#include "idic/canonical.hpp"
#include "idic/dataset.hpp"
#include "idic/errors.hpp"
#include "idic/eval.hpp"
#include "idic/example_pool.hpp"
#include "idic/retrieval.hpp"
#include "idic/run_config.hpp"
#include "idic/sql_codec.hpp"
#include "idic/state.hpp"

namespace fs = std::filesystem;
using namespace idic;

namespace {

// Writes next to the target and renames into place, so a failed run never
// leaves a partial file behind.
void write_atomically(const fs::path& target, const std::string& content) {
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

// Flag values; empty means "not given".
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<double> fraction;
  std::string llm;
  std::string embed;
  std::string intent;
  std::string mode;
  std::string record;
  std::string replay;
  std::optional<int> workers;
  bool gold_threading = false;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig config;
  if (!o.config_path.empty()) merge_run_config_file(config, o.config_path);
  apply_environment(config);
  if (o.seed) config.seed = *o.seed;
  if (o.k) config.k = *o.k;
  if (o.fraction) config.fraction = *o.fraction;
  if (!o.llm.empty()) config.llm_backend = parse_llm_kind(o.llm);
  if (!o.embed.empty()) config.embedding_provider = parse_embedding_kind(o.embed);
  if (!o.intent.empty()) config.intent_backend = parse_intent_backend(o.intent);
  if (!o.mode.empty()) config.retrieval_mode = parse_retrieval_mode(o.mode);
  if (!o.record.empty()) config.record_fixture = o.record;
  if (!o.replay.empty()) config.replay_fixture = o.replay;
  if (o.workers) config.workers = *o.workers;
  if (o.gold_threading) config.gold_threading = true;
  return config;
}

void echo_config(const std::string& command, const RunConfig& config) {
  std::cerr << "# idic " << command << " effective config\n";
  std::istringstream lines(to_text(config));
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) std::cerr << "#   " << line << "\n";
  }
}

Schema schema_for(const RunConfig& config) {
  return config.schema_path.empty() ? default_multiwoz_schema() : load_schema(config.schema_path);
}

DialogueDataset require_dataset(const std::string& path, const char* what, const Schema& schema) {
  if (path.empty()) throw ConfigError(std::string("no ") + what + " dataset configured");
  return read_canonical_jsonl(fs::path(path), schema);
}

// Owns whatever backends the config asks for.
struct ServiceBundle {
  std::shared_ptr<const CompletionBackend> llm;
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<NluClient> nlu;

  PipelineServices view() const { return {llm.get(), embedder.get(), nlu.get()}; }
};

ServiceBundle make_services(const RunConfig& config, const Schema& schema,
                            const DialogueDataset& eval_data) {
  ServiceBundle s;
  switch (config.llm_backend) {
    case LlmKind::oracle:
      s.llm = std::make_shared<OracleBackend>(gold_lookup(eval_data), schema);
      break;
    case LlmKind::replay:
      if (config.replay_fixture.empty()) throw ConfigError("llm.replay_fixture is not set");
      s.llm = std::make_shared<ReplayBackend>(config.replay_fixture);
      break;
    case LlmKind::remote: {
      if (config.llm_url.empty()) throw ConfigError("llm.url is not set (or IDIC_LLM_URL)");
      RemoteLlmConfig rc;
      rc.endpoint = config.llm_endpoint();
      rc.dialect = config.llm_dialect;
      rc.model = config.llm_model;
      rc.max_concurrency = config.max_concurrency;
      s.llm = std::make_shared<RemoteBackend>(rc);
      break;
    }
  }
  if (!config.record_fixture.empty()) {
    s.llm = std::make_shared<RecordingBackend>(s.llm, config.record_fixture);
  }
  if (config.embedding_provider == EmbeddingKind::remote) {
    if (config.embed_url.empty()) throw ConfigError("retrieval.endpoint is not set (or IDIC_EMBED_URL)");
    s.embedder = std::make_unique<RemoteEmbedding>(config.embed_endpoint());
  } else {
    s.embedder = std::make_unique<LexicalEmbedding>();
  }
  if (config.intent_backend == IntentBackendKind::model) {
    if (config.nlu_url.empty()) throw ConfigError("intent.endpoint is not set (or IDIC_NLU_URL)");
    s.nlu = std::make_unique<NluClient>(config.nlu_endpoint(), schema);
  }
  return s;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "run configuration file");
  cmd->add_option("--seed", o.seed, "seed for every random choice");
}

void add_pipeline(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--k", o.k, "examples retrieved per turn")->check(CLI::PositiveNumber);
  cmd->add_option("--llm", o.llm, "completion backend")
      ->check(CLI::IsMember({"remote", "replay", "oracle"}));
  cmd->add_option("--embed", o.embed, "embedding provider")->check(CLI::IsMember({"lexical", "remote"}));
  cmd->add_option("--intent", o.intent, "intent source")->check(CLI::IsMember({"oracle", "model", "off"}));
  cmd->add_option("--mode", o.mode, "retrieval query")
      ->check(CLI::IsMember({"intent_masked", "unmasked_context", "off"}));
  cmd->add_option("--record", o.record, "append completions to this replay fixture");
  cmd->add_option("--replay", o.replay, "replay fixture for --llm replay");
  cmd->add_option("--workers", o.workers, "dialogues tracked in parallel")->check(CLI::PositiveNumber);
  cmd->add_flag("--gold-threading", o.gold_threading, "feed the gold previous state to every turn");
}

StateChange parse_pairs(const std::vector<std::string>& items, const Schema& schema) {
  StateChange delta;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw FormatError("expected domain-slot=value, got '" + item + "'");
    SlotKey key = parse_flat_key(item.substr(0, eq));
    delta.set(key, canonicalize_value(key.domain, key.slot, item.substr(eq + 1), schema.synonyms()));
  }
  delta.validate(schema);
  return delta;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"In-context dialogue state tracking with intent-masked example retrieval"};
  app.require_subcommand(1);
  Overrides o;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "convert a MultiWOZ data.json into canonical JSONL");
  std::string ingest_in, ingest_out, version = "2.1", split = "train", dev_list, test_list;
  add_common(ingest, o);
  ingest->add_option("data", ingest_in, "MultiWOZ data.json")->required();
  ingest->add_option("-o,--out", ingest_out, "output JSONL")->required();
  ingest->add_option("--version", version, "MultiWOZ version")->check(CLI::IsMember({"2.1", "2.4"}));
  ingest->add_option("--split", split, "split to keep")->check(CLI::IsMember({"train", "dev", "test"}));
  ingest->add_option("--dev-list", dev_list, "file listing dev dialogue ids");
  ingest->add_option("--test-list", test_list, "file listing test dialogue ids");

  // sample
  auto* sample = app.add_subcommand("sample", "draw a seeded few-shot pool of whole dialogues");
  std::string sample_in, sample_out;
  add_common(sample, o);
  sample->add_option("data", sample_in, "canonical JSONL to sample from")->required();
  sample->add_option("-o,--out", sample_out, "output JSONL")->required();
  sample->add_option("--fraction", o.fraction, "share of dialogues, in (0, 1]")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            double v = std::strtod(s.c_str(), nullptr);
            return v > 0.0 && v <= 1.0 ? std::string() : "fraction must be in (0, 1]";
          },
          "(0,1]"));

  // track
  auto* track = app.add_subcommand("track", "track one dialogue and print its per-turn trace");
  std::string track_id;
  add_common(track, o);
  add_pipeline(track, o);
  track->add_option("dialogue", track_id, "dialogue id in the eval dataset")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "track every dialogue of the eval dataset and score it");
  std::string eval_out, eval_trace;
  add_common(eval, o);
  add_pipeline(eval, o);
  eval->add_option("-o,--out", eval_out, "report JSON path (default: output.report)");
  eval->add_option("--trace", eval_trace, "per-turn trace JSONL path (default: output.trace)");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "compare intent and retrieval variants");
  std::string ablate_out;
  add_common(ablate, o);
  add_pipeline(ablate, o);
  ablate->add_option("-o,--out", ablate_out, "ablation JSON path");

  // mine-pairs
  auto* mine = app.add_subcommand("mine-pairs", "mine similarity-labelled text pairs from the pool");
  std::string mine_out;
  add_common(mine, o);
  mine->add_option("-o,--out", mine_out, "pair JSONL path")->required();

  // sql
  auto* sql = app.add_subcommand("sql", "encode or parse one SQL statement");
  sql->require_subcommand(1);
  add_common(sql, o);
  auto* sql_encode = sql->add_subcommand("encode", "domain-slot=value pairs to SQL");
  std::vector<std::string> encode_pairs;
  sql_encode->add_option("pairs", encode_pairs, "pairs such as hotel-area=centre");
  auto* sql_parse = sql->add_subcommand("parse", "SQL to domain-slot=value lines");
  std::string parse_text;
  sql_parse->add_option("text", parse_text, "generated SQL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig config = resolve_config(o);
    CLI::App* cmd = app.get_subcommands().front();
    echo_config(cmd->get_name(), config);
    const Schema schema = schema_for(config);

    if (cmd == ingest) {
      MultiwozLoadOptions options;
      options.version = parse_multiwoz_version(version);
      options.split = parse_split(split);
      if (!dev_list.empty()) options.dev_list = dev_list;
      if (!test_list.empty()) options.test_list = test_list;
      DialogueDataset data = load_multiwoz(ingest_in, schema, options);
      std::ostringstream out;
      write_canonical_jsonl(data, out);
      write_atomically(ingest_out, out.str());
      std::cerr << "wrote " << data.dialogues.size() << " dialogues to " << ingest_out << "\n";
    } else if (cmd == sample) {
      DialogueDataset data = read_canonical_jsonl(fs::path(sample_in), schema);
      DialogueDataset pool = sample_fewshot(data, config.fraction, config.seed);
      std::ostringstream out;
      write_canonical_jsonl(pool, out);
      write_atomically(sample_out, out.str());
      std::cerr << "sampled " << pool.dialogues.size() << " of " << data.dialogues.size()
                << " dialogues\n";
    } else if (cmd == track || cmd == eval || cmd == ablate) {
      DialogueDataset eval_data = require_dataset(config.eval_path, "eval", schema);
      DialogueDataset pool_data = require_dataset(config.pool_path, "pool", schema);
      std::vector<RetrievalExample> pool = build_example_pool(pool_data);
      ServiceBundle services = make_services(config, schema, eval_data);

      if (cmd == track) {
        const Dialogue* dialogue = eval_data.find(track_id);
        if (!dialogue) throw ConfigError("dialogue '" + track_id + "' is not in the eval dataset");
        Tracker tracker(config.pipeline(), schema, pool, services.view());
        DialogueResult result = tracker.track_dialogue(*dialogue);
        std::cout << trace_jsonl(std::span<const DialogueResult>(&result, 1));
        if (result.aborted) throw Error("dialogue aborted: " + result.abort_reason);
      } else if (cmd == eval) {
        Tracker tracker(config.pipeline(), schema, pool, services.view());
        EvalRun run = evaluate(tracker, eval_data);
        const std::string report_path = eval_out.empty() ? config.report_path : eval_out;
        const std::string trace_path = eval_trace.empty() ? config.trace_path : eval_trace;
        const std::string trace = trace_jsonl(run.dialogues);
        const std::string report = to_json(run.report).dump(2) + "\n";
        if (!trace_path.empty()) write_atomically(trace_path, trace);
        if (!report_path.empty()) write_atomically(report_path, report);
        std::cout << report_table(run.report);
      } else {
        std::vector<AblationRow> rows = run_ablation(config.pipeline(), eval_data, pool, services.view());
        const std::string path = ablate_out.empty() ? config.report_path : ablate_out;
        if (!path.empty()) write_atomically(path, to_json(rows).dump(2) + "\n");
        std::cout << ablation_table(rows);
      }
    } else if (cmd == mine) {
      DialogueDataset pool_data = require_dataset(config.pool_path, "pool", schema);
      std::vector<RetrievalExample> pool = build_example_pool(pool_data);
      MiningOptions options;
      options.positives_per_anchor = config.positives_per_anchor;
      options.negatives_per_anchor = config.negatives_per_anchor;
      options.negative_threshold = config.negative_threshold;
      options.seed = config.seed;
      std::vector<TrainingPair> pairs = mine_training_pairs(pool, options);
      write_atomically(mine_out, training_pairs_jsonl(pairs));
      std::cerr << "mined " << pairs.size() << " pairs from " << pool.size() << " examples\n";
    } else if (cmd == sql) {
      if (sql->got_subcommand(sql_encode)) {
        std::cout << encode_delta_as_sql(parse_pairs(encode_pairs, schema), schema) << "\n";
      } else {
        ParsedSql parsed = parse_sql(parse_text, schema);
        if (parsed.status == ParseStatus::error) {
          throw FormatError(to_string(parsed.error->kind) + ": " + parsed.error->message);
        }
        for (const auto& [key, value] : parsed.where_pairs.pairs()) {
          std::cout << flat_key(key) << "=" << value << "\n";
        }
      }
    }
  } catch (const std::exception& e) {
    std::string message = e.what();
    for (char& c : message) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << message << "\n";
    return 1;
  }
  return 0;
}
