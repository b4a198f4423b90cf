#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idic/dataset.hpp"
#include "idic/rng.hpp"
#include "idic/schema.hpp"
#include "idic/state.hpp"

namespace idic::testing {

// Canonical values the generator draws from for a slot. Every value is a
// fixed point of canonicalize_value.
const std::vector<std::string>& value_vocabulary(const std::string& slot);

struct DeltaOptions {
  int max_domains = 3;
  int max_pairs_per_domain = 3;
  double deletion_probability = 0.15;
  double quote_probability = 0.2;  // pick a value carrying an apostrophe
};

// Random nonempty state change over the schema.
StateChange random_state_change(DeterministicRng& rng, const Schema& schema,
                                const DeltaOptions& options = {});

struct SyntheticOptions {
  std::size_t dialogues = 20;
  std::uint64_t seed = 1;
  std::string id_prefix = "SYN";
  int min_turns = 3;
  int max_turns = 7;
};

// Task-oriented dialogues over hotel, restaurant, train, attraction and taxi
// with templated user turns and chatty system turns that mention values
// unrelated to the user's request.
DialogueDataset synthetic_dataset(const Schema& schema, const SyntheticOptions& options);

}  // namespace idic::testing
