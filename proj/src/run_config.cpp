#include "idic/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "idic/errors.hpp"

namespace idic {
namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("bad numeric value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  std::string s(value);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("bad real value '" + s + "' for " + std::string(key));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("bad boolean '" + std::string(value) + "' for " + std::string(key));
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  Setter set;
  Getter get;
  bool quoted;
};

std::string real_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

#define IDIC_STRING(member) \
  Field { [](RunConfig& c, std::string_view, std::string_view v) { c.member = std::string(v); }, \
          [](const RunConfig& c) { return c.member; }, true }
#define IDIC_INT(member) \
  Field { [](RunConfig& c, std::string_view k, std::string_view v) { c.member = parse_number<decltype(c.member)>(k, v); }, \
          [](const RunConfig& c) { return std::to_string(c.member); }, false }
#define IDIC_REAL(member) \
  Field { [](RunConfig& c, std::string_view k, std::string_view v) { c.member = parse_real(k, v); }, \
          [](const RunConfig& c) { return real_text(c.member); }, false }
#define IDIC_BOOL(member) \
  Field { [](RunConfig& c, std::string_view k, std::string_view v) { c.member = parse_bool(k, v); }, \
          [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, false }
#define IDIC_ENUM(member, parse) \
  Field { [](RunConfig& c, std::string_view, std::string_view v) { c.member = parse(v); }, \
          [](const RunConfig& c) { return to_string(c.member); }, false }

std::string to_string(WireDialect d) {
  return d == WireDialect::minimal ? "minimal" : "openai";
}

// Ordered as rendered by to_text.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"seed", IDIC_INT(seed)},
      {"data.schema", IDIC_STRING(schema_path)},
      {"data.pool", IDIC_STRING(pool_path)},
      {"data.eval", IDIC_STRING(eval_path)},
      {"fewshot.fraction", IDIC_REAL(fraction)},
      {"retrieval.k", IDIC_INT(k)},
      {"retrieval.mode", IDIC_ENUM(retrieval_mode, parse_retrieval_mode)},
      {"retrieval.provider", IDIC_ENUM(embedding_provider, parse_embedding_kind)},
      {"retrieval.endpoint", IDIC_STRING(embed_url)},
      {"intent.backend", IDIC_ENUM(intent_backend, parse_intent_backend)},
      {"intent.endpoint", IDIC_STRING(nlu_url)},
      {"llm.backend", IDIC_ENUM(llm_backend, parse_llm_kind)},
      {"llm.url", IDIC_STRING(llm_url)},
      {"llm.dialect", IDIC_ENUM(llm_dialect, parse_wire_dialect)},
      {"llm.model", IDIC_STRING(llm_model)},
      {"llm.replay_fixture", IDIC_STRING(replay_fixture)},
      {"llm.record_fixture", IDIC_STRING(record_fixture)},
      {"llm.timeout_ms", IDIC_INT(timeout_ms)},
      {"llm.retries", IDIC_INT(retries)},
      {"llm.max_concurrency", IDIC_INT(max_concurrency)},
      {"prompt.budget", IDIC_INT(prompt_budget)},
      {"eval.workers", IDIC_INT(workers)},
      {"eval.gold_threading", IDIC_BOOL(gold_threading)},
      {"mining.positives", IDIC_INT(positives_per_anchor)},
      {"mining.negatives", IDIC_INT(negatives_per_anchor)},
      {"mining.threshold", IDIC_REAL(negative_threshold)},
      {"output.report", IDIC_STRING(report_path)},
      {"output.trace", IDIC_STRING(trace_path)},
  };
  return table;
}

#undef IDIC_STRING
#undef IDIC_INT
#undef IDIC_REAL
#undef IDIC_BOOL
#undef IDIC_ENUM

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment outside quotes and unquotes the value.
std::string parse_value(std::string_view raw, int line_no) {
  raw = trim(raw);
  if (!raw.empty() && raw.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < raw.size(); ++i) {
      char c = raw[i];
      if (c == '\\' && i + 1 < raw.size()) {
        char n = raw[++i];
        out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
      } else if (c == '"') {
        break;
      } else {
        out.push_back(c);
      }
    }
    if (i >= raw.size()) throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
    auto rest = trim(raw.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') {
      throw ConfigError("line " + std::to_string(line_no) + ": text after quoted value");
    }
    return out;
  }
  if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = trim(raw.substr(0, hash));
  return std::string(raw);
}

std::string quote(const std::string& v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.intent_backend = intent_backend;
  p.retrieval_mode = retrieval_mode;
  p.k = k;
  p.embedding_provider = embedding_provider;
  p.llm_backend = llm_backend;
  p.prompt_budget = prompt_budget;
  p.seed = seed;
  p.gold_threading = gold_threading;
  p.workers = workers;
  return p;
}

namespace {
HttpEndpoint endpoint_for(const RunConfig& c, const std::string& url) {
  HttpEndpoint e;
  e.base_url = url;
  e.timeout = std::chrono::milliseconds(c.timeout_ms);
  e.retries = c.retries;
  return e;
}
}  // namespace

HttpEndpoint RunConfig::llm_endpoint() const { return endpoint_for(*this, llm_url); }
HttpEndpoint RunConfig::embed_endpoint() const { return endpoint_for(*this, embed_url); }
HttpEndpoint RunConfig::nlu_endpoint() const { return endpoint_for(*this, nlu_url); }

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig config;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    try {
      set_config_value(config, key, parse_value(line.substr(eq + 1), line_no));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

void merge_run_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  // Re-parse onto the current values: only keys present in the file change.
  const std::string text = buffer.str();
  RunConfig parsed = parse_run_config(text);
  const RunConfig defaults;
  for (const auto& [name, field] : fields()) {
    if (field.get(parsed) != field.get(defaults)) field.set(config, name, field.get(parsed));
  }
}

void apply_environment(RunConfig& config, const EnvLookup& lookup) {
  if (auto v = lookup("IDIC_LLM_URL")) config.llm_url = *v;
  if (auto v = lookup("IDIC_EMBED_URL")) config.embed_url = *v;
  if (auto v = lookup("IDIC_NLU_URL")) config.nlu_url = *v;
}

void apply_environment(RunConfig& config) {
  apply_environment(config, [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  });
}

std::string to_text(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& [name, field] : fields()) {
    auto dot = name.find('.');
    std::string sec = dot == std::string::npos ? "" : name.substr(0, dot);
    std::string key = dot == std::string::npos ? name : name.substr(dot + 1);
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    std::string value = field.get(config);
    out += key + " = " + (field.quoted ? quote(value) : value) + "\n";
  }
  return out;
}

}  // namespace idic
