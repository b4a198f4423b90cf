#include "idic/llm_client.hpp"

#include <json.hpp>

#include "idic/errors.hpp"
#include "idic/hash.hpp"
#include "idic/sql_codec.hpp"

namespace idic {
namespace {

using Clock = std::chrono::steady_clock;

std::chrono::milliseconds since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
}

// Holds one concurrency slot for the lifetime of a request.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

WireDialect parse_wire_dialect(std::string_view text) {
  if (text == "minimal") return WireDialect::minimal;
  if (text == "openai" || text == "openai_completions") return WireDialect::openai_completions;
  throw ConfigError("unknown wire dialect '" + std::string(text) + "'");
}

RemoteBackend::RemoteBackend(RemoteLlmConfig config)
    : config_(std::move(config)),
      slots_(std::make_unique<std::counting_semaphore<>>(std::max(1, config_.max_concurrency))) {}

CompletionResult RemoteBackend::complete(const CompletionRequest& request) const {
  SlotGuard slot(*slots_);
  const auto start = Clock::now();
  nlohmann::json body;
  if (config_.dialect == WireDialect::openai_completions && !config_.model.empty()) {
    body["model"] = config_.model;
  }
  body["prompt"] = request.prompt;
  body["max_tokens"] = request.max_tokens;
  body["temperature"] = request.temperature;
  body["stop"] = request.stop_sequences;

  const char* path =
      config_.dialect == WireDialect::minimal ? "/complete" : "/v1/completions";
  nlohmann::json reply = post_json(config_.endpoint, path, body);

  CompletionResult out;
  out.backend_id = id();
  try {
    if (config_.dialect == WireDialect::minimal) {
      out.text = reply.at("text").get<std::string>();
    } else {
      out.text = reply.at("choices").at(0).at("text").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("completion reply without text: ") + e.what());
  }
  out.latency = since(start);
  return out;
}

OracleBackend::OracleBackend(std::map<ExampleSource, StateChange> gold, Schema schema)
    : gold_(std::move(gold)), schema_(std::move(schema)) {}

CompletionResult OracleBackend::complete(const CompletionRequest& request) const {
  auto id_it = request.metadata.find("dialogue_id");
  auto turn_it = request.metadata.find("turn_index");
  if (id_it == request.metadata.end() || turn_it == request.metadata.end()) {
    throw MissingGold("oracle backend needs dialogue_id and turn_index metadata");
  }
  ExampleSource key{id_it->second, std::stoi(turn_it->second)};
  auto it = gold_.find(key);
  if (it == gold_.end()) {
    throw MissingGold("no gold delta for " + key.dialogue_id + " turn " + turn_it->second);
  }
  std::string sql = encode_delta_as_sql(it->second, schema_);
  sql.pop_back();  // the stop sequence consumes ';'
  return {std::move(sql), std::chrono::milliseconds{0}, id()};
}

ReplayBackend::ReplayBackend(const std::filesystem::path& fixture) {
  std::ifstream in(fixture, std::ios::binary);
  if (!in) throw FormatError("cannot open replay fixture " + fixture.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      by_hash_[j.at("prompt_sha256").get<std::string>()] = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(fixture.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

CompletionResult ReplayBackend::complete(const CompletionRequest& request) const {
  const std::string hash = sha256_hex(request.prompt);
  auto it = by_hash_.find(hash);
  if (it == by_hash_.end()) throw UnknownPrompt(hash);
  return {it->second, std::chrono::milliseconds{0}, id()};
}

RecordingBackend::RecordingBackend(std::shared_ptr<const CompletionBackend> inner,
                                   const std::filesystem::path& fixture)
    : inner_(std::move(inner)), out_(fixture, std::ios::binary | std::ios::app) {
  if (!out_) throw FormatError("cannot open replay fixture for writing: " + fixture.string());
}

CompletionResult RecordingBackend::complete(const CompletionRequest& request) const {
  CompletionResult result = inner_->complete(request);
  nlohmann::ordered_json j;
  j["prompt_sha256"] = sha256_hex(request.prompt);
  j["text"] = result.text;
  std::lock_guard lock(mutex_);
  out_ << j.dump() << '\n';
  out_.flush();
  return result;
}

}  // namespace idic
