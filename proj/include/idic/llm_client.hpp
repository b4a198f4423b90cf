#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include "idic/http_json.hpp"
#include "idic/retrieval.hpp"
#include "idic/schema.hpp"
#include "idic/state.hpp"

namespace idic {

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 200;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences{";"};
  // Not sent over the wire. The oracle backend reads "dialogue_id" and
  // "turn_index" from here.
  std::map<std::string, std::string> metadata;
};

struct CompletionResult {
  std::string text;
  std::chrono::milliseconds latency{0};
  std::string backend_id;
};

// Shareable across threads; complete() may be called concurrently.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string id() const = 0;
  virtual CompletionResult complete(const CompletionRequest& request) const = 0;
};

enum class WireDialect {
  minimal,            // POST {base}/complete {"prompt","max_tokens","temperature","stop"} -> {"text"}
  openai_completions  // POST {base}/v1/completions ... -> {"choices":[{"text"}]}
};

WireDialect parse_wire_dialect(std::string_view text);

struct RemoteLlmConfig {
  HttpEndpoint endpoint;
  WireDialect dialect = WireDialect::minimal;
  std::string model;  // sent as "model" in the openai dialect only
  int max_concurrency = 4;
};

class RemoteBackend final : public CompletionBackend {
 public:
  explicit RemoteBackend(RemoteLlmConfig config);

  std::string id() const override { return "remote:" + config_.endpoint.base_url; }

  // Throws TransportError after exhausting retries, BackendError on a
  // non-2xx reply and DecodeError on a reply without completion text.
  CompletionResult complete(const CompletionRequest& request) const override;

 private:
  RemoteLlmConfig config_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

// Answers with the gold SQL of the turn named in the request metadata,
// without the trailing ';' (a real model stops on it).
class OracleBackend final : public CompletionBackend {
 public:
  OracleBackend(std::map<ExampleSource, StateChange> gold, Schema schema);

  std::string id() const override { return "oracle"; }

  // Throws MissingGold for turns outside the lookup.
  CompletionResult complete(const CompletionRequest& request) const override;

 private:
  std::map<ExampleSource, StateChange> gold_;
  Schema schema_;
};

// Answers from a JSONL fixture of {"prompt_sha256", "text"} records.
class ReplayBackend final : public CompletionBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& fixture);

  std::string id() const override { return "replay"; }
  std::size_t size() const noexcept { return by_hash_.size(); }

  // Throws UnknownPrompt naming the hash on a miss.
  CompletionResult complete(const CompletionRequest& request) const override;

 private:
  std::map<std::string, std::string> by_hash_;
};

// Forwards to `inner` and appends every answer to a replay fixture.
class RecordingBackend final : public CompletionBackend {
 public:
  RecordingBackend(std::shared_ptr<const CompletionBackend> inner,
                   const std::filesystem::path& fixture);

  std::string id() const override { return inner_->id(); }
  CompletionResult complete(const CompletionRequest& request) const override;

 private:
  std::shared_ptr<const CompletionBackend> inner_;
  mutable std::mutex mutex_;
  mutable std::ofstream out_;
};

}  // namespace idic
