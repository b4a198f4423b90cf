#include "idic/example_pool.hpp"

#include "idic/sql_codec.hpp"

namespace idic {

DialogueInformation make_dialogue_information(const Dialogue& dialogue, std::size_t turn,
                                              const DialogueState& prev_state) {
  const DialogueTurn& t = dialogue.turns.at(turn);
  DialogueInformation info;
  info.turn_index = t.turn_index;
  info.active_domains = t.active_domains;
  info.user_utterance = t.user_utterance;
  info.system_utterance = t.system_utterance;
  info.prev_state = prev_state;
  info.history.reserve(turn);
  for (std::size_t i = 0; i < turn; ++i) {
    info.history.push_back({dialogue.turns[i].system_utterance, dialogue.turns[i].user_utterance});
  }
  return info;
}

std::vector<RetrievalExample> build_example_pool(const DialogueDataset& dataset) {
  std::vector<RetrievalExample> pool;
  pool.reserve(dataset.turn_count());
  for (const auto& dialogue : dataset.dialogues) {
    DialogueState prev;
    for (std::size_t t = 0; t < dialogue.turns.size(); ++t) {
      const DialogueState& curr = dialogue.turns[t].gold_state;
      DialogueInformation info = make_dialogue_information(dialogue, t, prev);

      RetrievalExample e;
      e.source = {dialogue.dialogue_id, dialogue.turns[t].turn_index};
      e.state_change = state_diff(prev, curr);
      e.context_text = serialize_context(AugmentedDialogueInformation{info, std::nullopt});
      e.query_text = serialize_masked(mask(augment(std::move(info), oracle_intent(prev, curr))));
      e.prompt_block = render_example_block(e.query_text, e.state_change, dataset.schema);
      pool.push_back(std::move(e));
      prev = curr;
    }
  }
  return pool;
}

}  // namespace idic
