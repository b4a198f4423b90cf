#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idic/http_json.hpp"
#include "idic/schema.hpp"
#include "idic/state.hpp"

namespace idic {

struct Intent {
  std::string act = "inform";
  StateChange slot_values;

  bool empty() const noexcept { return slot_values.empty(); }
  bool operator==(const Intent&) const = default;
};

// `[inform]{"attraction-area":"south"}`; pairs in key order, ", " separated.
std::string format_intent(const Intent& intent);

struct IntentDecode {
  Intent intent;
  int dropped_pairs = 0;             // well-formed pairs naming unknown slots or empty values
  std::optional<std::string> error;  // set when the text is outside the intent grammar
};

// Never throws. Text outside the `[act]{...}` grammar yields an empty
// inform intent with `error` set.
IntentDecode parse_intent(std::string_view text, const Schema& schema);

// Gold intent: the turn's state change with deletions dropped.
Intent oracle_intent(const DialogueState& prev_gold, const DialogueState& curr_gold);

struct Exchange {
  std::string system;
  std::string user;

  bool operator==(const Exchange&) const = default;
};

struct DialogueInformation {
  int turn_index = 0;
  std::vector<std::string> active_domains;
  std::string user_utterance;
  std::string system_utterance;  // system turn directly before the user's
  std::vector<Exchange> history;  // one entry per earlier turn
  DialogueState prev_state;
  std::map<std::string, std::string> other;

  bool operator==(const DialogueInformation&) const = default;
};

struct AugmentedDialogueInformation {
  DialogueInformation base;
  std::optional<Intent> intent;  // absent when intent augmentation is switched off

  bool operator==(const AugmentedDialogueInformation&) const = default;
};

AugmentedDialogueInformation augment(DialogueInformation info, Intent intent);

// "{ attraction area: south, hotel stars: 4 }", or "{}" when empty.
std::string render_slot_braces(const std::map<SlotKey, std::string>& pairs);

// [CONTEXT] {prev state} [SYS] {system} [USER] {user} [INTENT] {intent} [DOMAIN] {domains}
// The [INTENT] segment is left out when no intent is attached; a trailing
// [OTHER] segment appears only when auxiliary fields exist.
std::string serialize_context(const AugmentedDialogueInformation& aug);

struct ModelIntentResult {
  Intent intent;
  int dropped_pairs = 0;
  std::optional<std::string> decode_error;
};

// Client for a remote NLU model: POST {base_url} {"context": ...} ->
// {"intent": "[act]{...}"}. Safe to share between threads.
class NluClient {
 public:
  NluClient(HttpEndpoint endpoint, Schema schema);

  // Throws TransportError / BackendError; malformed model output degrades
  // to an empty intent with decode_error set.
  ModelIntentResult model_intent(const DialogueInformation& info) const;

 private:
  HttpEndpoint endpoint_;
  Schema schema_;
};

}  // namespace idic
