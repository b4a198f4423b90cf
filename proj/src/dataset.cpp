#include "idic/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "idic/canonical.hpp"
#include "idic/errors.hpp"
#include "idic/rng.hpp"

namespace idic {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "dev" || text == "val") return Split::dev;
  if (text == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(text) + "'");
}

MultiwozVersion parse_multiwoz_version(std::string_view text) {
  if (text == "2.1") return MultiwozVersion::v21;
  if (text == "2.4") return MultiwozVersion::v24;
  throw ConfigError("unsupported MultiWOZ version '" + std::string(text) + "' (2.1 or 2.4)");
}

std::size_t DialogueDataset::turn_count() const {
  std::size_t n = 0;
  for (const auto& d : dialogues) n += d.turns.size();
  return n;
}

const Dialogue* DialogueDataset::find(std::string_view dialogue_id) const {
  for (const auto& d : dialogues) {
    if (d.dialogue_id == dialogue_id) return &d;
  }
  return nullptr;
}

StateChange gold_delta(const Dialogue& dialogue, std::size_t turn) {
  static const DialogueState kEmpty;
  const DialogueState& prev = turn == 0 ? kEmpty : dialogue.turns[turn - 1].gold_state;
  return state_diff(prev, dialogue.turns.at(turn).gold_state);
}

namespace {

bool is_unset(const std::string& v) {
  std::string lower;
  for (char c : v) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower.empty() || lower == "not mentioned" || lower == "none";
}

std::set<std::string> read_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open split list " + path.string());
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    auto e = line.find_last_not_of(" \t\r");
    if (b != std::string::npos) ids.insert(line.substr(b, e - b + 1));
  }
  return ids;
}

void add_slot(DialogueState& state, const Schema& schema, const std::string& dialogue_id,
              const std::string& domain, std::string slot, const json& value) {
  if (value.is_array() || value.is_object()) {
    throw FormatError("dialogue " + dialogue_id + ": non-scalar value for " + domain + "-" + slot);
  }
  if (!value.is_string()) return;
  const auto& raw = value.get_ref<const std::string&>();
  if (is_unset(raw)) return;
  std::transform(slot.begin(), slot.end(), slot.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (!schema.has_slot(domain, slot)) {
    throw SchemaViolation("dialogue " + dialogue_id + ": unknown slot '" + domain + "-" + slot +
                          "'");
  }
  state.set({domain, slot}, canonicalize_value(domain, slot, raw, schema.synonyms()));
}

DialogueState state_from_metadata(const json& metadata, const Schema& schema,
                                  const std::string& dialogue_id) {
  DialogueState state;
  for (const auto& [domain, body] : metadata.items()) {
    if (!body.is_object()) throw FormatError("dialogue " + dialogue_id + ": bad metadata");
    if (auto it = body.find("semi"); it != body.end()) {
      for (const auto& [slot, value] : it->items()) {
        add_slot(state, schema, dialogue_id, domain, slot, value);
      }
    }
    if (auto it = body.find("book"); it != body.end()) {
      for (const auto& [slot, value] : it->items()) {
        if (slot == "booked") continue;
        add_slot(state, schema, dialogue_id, domain, "book_" + slot, value);
      }
    }
  }
  return state;
}

Dialogue dialogue_from_multiwoz(const std::string& id, const json& body, const Schema& schema) {
  if (!body.is_object() || !body.contains("log") || !body["log"].is_array()) {
    throw FormatError("dialogue " + id + ": missing \"log\" array");
  }
  const json& log = body["log"];
  if (log.empty()) throw FormatError("dialogue " + id + ": empty log");

  Dialogue dialogue{id, {}};
  DialogueState prev;
  std::vector<std::string> prev_domains;
  std::string last_system;
  for (std::size_t i = 0; i < log.size(); i += 2) {
    const json& user = log[i];
    if (!user.is_object() || !user.contains("text") || !user["text"].is_string()) {
      throw FormatError("dialogue " + id + ": log entry " + std::to_string(i) + " has no text");
    }
    DialogueTurn turn;
    turn.turn_index = static_cast<int>(i / 2);
    turn.user_utterance = user["text"].get<std::string>();
    turn.system_utterance = last_system;
    turn.gold_state = prev;
    if (i + 1 < log.size()) {
      const json& sys = log[i + 1];
      if (!sys.is_object() || !sys.contains("text") || !sys["text"].is_string()) {
        throw FormatError("dialogue " + id + ": log entry " + std::to_string(i + 1) +
                          " has no text");
      }
      last_system = sys["text"].get<std::string>();
      if (auto it = sys.find("metadata"); it != sys.end() && it->is_object() && !it->empty()) {
        turn.gold_state = state_from_metadata(*it, schema, id);
      }
    }
    auto changed = state_diff(prev, turn.gold_state).domains();
    turn.active_domains = changed.empty() ? prev_domains : changed;
    prev = turn.gold_state;
    prev_domains = turn.active_domains;
    dialogue.turns.push_back(std::move(turn));
  }
  return dialogue;
}

ordered_json turn_to_json(const DialogueTurn& t) {
  ordered_json j;
  j["turn"] = t.turn_index;
  j["system"] = t.system_utterance;
  j["user"] = t.user_utterance;
  ordered_json state = ordered_json::object();
  for (const auto& [k, v] : t.gold_state.entries()) state[flat_key(k)] = v;
  j["state"] = std::move(state);
  j["domains"] = t.active_domains;
  return j;
}

}  // namespace

DialogueDataset parse_multiwoz(const std::string& json_text, const Schema& schema,
                               const MultiwozLoadOptions& options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("MultiWOZ data is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("MultiWOZ data must be an object keyed by dialogue id");

  std::set<std::string> dev_ids, test_ids;
  if (options.dev_list) dev_ids = read_id_list(*options.dev_list);
  if (options.test_list) test_ids = read_id_list(*options.test_list);
  const bool filter = options.dev_list || options.test_list;

  DialogueDataset dataset;
  dataset.split = options.split;
  dataset.schema = schema;
  for (const auto& [id, body] : doc.items()) {
    if (filter) {
      Split split = dev_ids.contains(id) ? Split::dev : test_ids.contains(id) ? Split::test
                                                                             : Split::train;
      if (split != options.split) continue;
    }
    dataset.dialogues.push_back(dialogue_from_multiwoz(id, body, schema));
  }
  return dataset;
}

DialogueDataset load_multiwoz(const std::filesystem::path& path, const Schema& schema,
                              const MultiwozLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_multiwoz(buffer.str(), schema, options);
}

void write_canonical_jsonl(const DialogueDataset& dataset, std::ostream& out) {
  for (const auto& d : dataset.dialogues) {
    ordered_json j;
    j["dialogue_id"] = d.dialogue_id;
    j["turns"] = ordered_json::array();
    for (const auto& t : d.turns) j["turns"].push_back(turn_to_json(t));
    out << j.dump() << '\n';
  }
}

void write_canonical_jsonl(const DialogueDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  write_canonical_jsonl(dataset, out);
  if (!out) throw FormatError("write failed for " + path.string());
}

DialogueDataset read_canonical_jsonl(std::istream& in, const Schema& schema, Split split) {
  DialogueDataset dataset;
  dataset.split = split;
  dataset.schema = schema;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return FormatError("line " + std::to_string(line_no) + ": " + why);
    };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw fail(e.what());
    }
    try {
      if (!j.is_object()) throw fail("expected a JSON object");
      for (const auto& [key, _] : j.items()) {
        if (key != "dialogue_id" && key != "turns") throw fail("unknown field '" + key + "'");
      }
      Dialogue d;
      d.dialogue_id = j.at("dialogue_id").get<std::string>();
      if (!ids.insert(d.dialogue_id).second) throw fail("duplicate dialogue id " + d.dialogue_id);
      const json& turns = j.at("turns");
      if (!turns.is_array() || turns.empty()) throw fail("dialogue needs at least one turn");
      for (const auto& tj : turns) {
        if (!tj.is_object()) throw fail("turn must be an object");
        for (const auto& [key, _] : tj.items()) {
          if (key != "turn" && key != "system" && key != "user" && key != "state" &&
              key != "domains") {
            throw fail("unknown turn field '" + key + "'");
          }
        }
        DialogueTurn t;
        t.turn_index = tj.at("turn").get<int>();
        if (t.turn_index != static_cast<int>(d.turns.size())) {
          throw fail("turn indices must be consecutive from 0");
        }
        t.system_utterance = tj.at("system").get<std::string>();
        t.user_utterance = tj.at("user").get<std::string>();
        for (const auto& [key, value] : tj.at("state").items()) {
          t.gold_state.set(parse_flat_key(key), value.get<std::string>());
        }
        t.gold_state.validate(schema);
        t.active_domains = tj.at("domains").get<std::vector<std::string>>();
        d.turns.push_back(std::move(t));
      }
      dataset.dialogues.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw fail(e.what());
    } catch (const SchemaViolation& e) {
      throw fail(e.what());
    } catch (const FormatError& e) {
      std::string what = e.what();
      if (what.rfind("line ", 0) == 0) throw;
      throw fail(what);
    }
  }
  return dataset;
}

DialogueDataset read_canonical_jsonl(const std::filesystem::path& path, const Schema& schema,
                                     Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_canonical_jsonl(in, schema, split);
}

DialogueDataset sample_fewshot(const DialogueDataset& dataset, double fraction,
                               std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("few-shot fraction must lie in (0, 1]");
  }
  const std::size_t n = dataset.dialogues.size();
  // The epsilon absorbs products like 0.07 * 100 = 7.000000000000001.
  auto target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  target = std::min(target, n);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  DeterministicRng rng(seed);
  rng.shuffle(order);
  order.resize(target);
  std::sort(order.begin(), order.end());

  DialogueDataset out;
  out.split = dataset.split;
  out.schema = dataset.schema;
  out.dialogues.reserve(target);
  for (auto i : order) out.dialogues.push_back(dataset.dialogues[i]);
  return out;
}

}  // namespace idic
