#pragma once

#include <vector>

#include "idic/dataset.hpp"
#include "idic/intent.hpp"
#include "idic/retrieval.hpp"

namespace idic {

// D_t for turn `turn` of `dialogue`, with `prev_state` standing in for the
// previous belief state (gold or predicted, at the caller's choice).
DialogueInformation make_dialogue_information(const Dialogue& dialogue, std::size_t turn,
                                              const DialogueState& prev_state);

// One example per turn, in dataset order. Each carries the turn's gold
// delta, its masked serialization under the gold intent, the unmasked
// context serialization and the rendered prompt block.
std::vector<RetrievalExample> build_example_pool(const DialogueDataset& dataset);

}  // namespace idic
