#include "idic/intent.hpp"

#include <json.hpp>

#include "idic/canonical.hpp"
#include "idic/errors.hpp"

namespace idic {

std::string format_intent(const Intent& intent) {
  std::string out = "[" + intent.act + "]{";
  bool first = true;
  for (const auto& [k, v] : intent.slot_values.pairs()) {
    if (!first) out += ", ";
    first = false;
    out += nlohmann::json(flat_key(k)).dump() + ":" + nlohmann::json(v).dump();
  }
  return out + "}";
}

IntentDecode parse_intent(std::string_view text, const Schema& schema) {
  IntentDecode out;
  auto fail = [&](std::string why) {
    out.intent = Intent{};
    out.error = std::move(why);
    return out;
  };
  auto b = text.find_first_not_of(" \t\r\n");
  auto e = text.find_last_not_of(" \t\r\n");
  if (b == std::string_view::npos) return fail("empty intent text");
  text = text.substr(b, e - b + 1);

  if (text.front() != '[') return fail("intent must start with '[act]'");
  auto close = text.find(']');
  if (close == std::string_view::npos || close == 1) return fail("missing act label");
  std::string act(text.substr(1, close - 1));
  if (act.find_first_of("[{}") != std::string::npos) return fail("malformed act label");

  auto body = text.substr(close + 1);
  auto lead = body.find_first_not_of(" \t");
  if (lead == std::string_view::npos || body[lead] != '{' || body.back() != '}') {
    return fail("missing '{...}' slot-value body");
  }
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(body.substr(lead));
  } catch (const nlohmann::json::exception&) {
    return fail("slot-value body is not a JSON object");
  }
  if (!obj.is_object()) return fail("slot-value body is not a JSON object");

  out.intent.act = std::move(act);
  for (const auto& [key, value] : obj.items()) {
    try {
      SlotKey k = parse_flat_key(key);
      if (!value.is_string() || !schema.has_slot(k.domain, k.slot)) {
        ++out.dropped_pairs;
        continue;
      }
      out.intent.slot_values.set(
          k, canonicalize_value(k.domain, k.slot, value.get<std::string>(), schema.synonyms()));
    } catch (const Error&) {
      ++out.dropped_pairs;
    }
  }
  return out;
}

Intent oracle_intent(const DialogueState& prev_gold, const DialogueState& curr_gold) {
  return Intent{"inform", state_diff(prev_gold, curr_gold).without_deletions()};
}

AugmentedDialogueInformation augment(DialogueInformation info, Intent intent) {
  return {std::move(info), std::move(intent)};
}

std::string render_slot_braces(const std::map<SlotKey, std::string>& pairs) {
  if (pairs.empty()) return "{}";
  std::string out = "{ ";
  bool first = true;
  for (const auto& [k, v] : pairs) {
    if (!first) out += ", ";
    first = false;
    out += k.domain + " " + k.slot + ": " + v;
  }
  return out + " }";
}

std::string serialize_context(const AugmentedDialogueInformation& aug) {
  const auto& info = aug.base;
  std::string out = "[CONTEXT] " + render_slot_braces(info.prev_state.entries());
  out += " [SYS] " + info.system_utterance;
  out += " [USER] " + info.user_utterance;
  if (aug.intent) out += " [INTENT] " + format_intent(*aug.intent);
  out += " [DOMAIN]";
  for (std::size_t i = 0; i < info.active_domains.size(); ++i) {
    out += (i == 0 ? " " : ", ") + info.active_domains[i];
  }
  if (!info.other.empty()) {
    out += " [OTHER]";
    for (const auto& [k, v] : info.other) out += " " + k + ": " + v + ";";
  }
  return out;
}

NluClient::NluClient(HttpEndpoint endpoint, Schema schema)
    : endpoint_(std::move(endpoint)), schema_(std::move(schema)) {}

ModelIntentResult NluClient::model_intent(const DialogueInformation& info) const {
  nlohmann::json body;
  body["context"] = serialize_context(AugmentedDialogueInformation{info, std::nullopt});
  ModelIntentResult out;
  nlohmann::json reply;
  try {
    reply = post_json(endpoint_, "", body);
  } catch (const DecodeError& e) {
    out.decode_error = e.what();
    return out;
  }
  if (!reply.is_object() || !reply.contains("intent") || !reply["intent"].is_string()) {
    out.decode_error = "reply lacks a string \"intent\" field";
    return out;
  }
  IntentDecode decoded = parse_intent(reply["intent"].get<std::string>(), schema_);
  out.intent = std::move(decoded.intent);
  out.dropped_pairs = decoded.dropped_pairs;
  out.decode_error = std::move(decoded.error);
  return out;
}

}  // namespace idic
