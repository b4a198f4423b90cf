#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idic/schema.hpp"
#include "idic/state.hpp"

namespace idic {

enum class Split { train, dev, test };
enum class MultiwozVersion { v21, v24 };

std::string to_string(Split split);
Split parse_split(std::string_view text);
MultiwozVersion parse_multiwoz_version(std::string_view text);

struct DialogueTurn {
  int turn_index = 0;
  std::string user_utterance;
  std::string system_utterance;  // system turn preceding the user; empty at turn 0
  DialogueState gold_state;      // cumulative state after this turn
  std::vector<std::string> active_domains;

  bool operator==(const DialogueTurn&) const = default;
};

struct Dialogue {
  std::string dialogue_id;
  std::vector<DialogueTurn> turns;

  bool operator==(const Dialogue&) const = default;
};

struct DialogueDataset {
  Split split = Split::train;
  std::vector<Dialogue> dialogues;
  Schema schema;

  std::size_t turn_count() const;
  const Dialogue* find(std::string_view dialogue_id) const;

  bool operator==(const DialogueDataset&) const = default;
};

// Gold delta of turn `t`: diff of the previous turn's gold state (empty
// before the first turn) and this turn's.
StateChange gold_delta(const Dialogue& dialogue, std::size_t turn);

struct MultiwozLoadOptions {
  MultiwozVersion version = MultiwozVersion::v21;
  Split split = Split::train;
  // When either list is given, dialogues are filtered: ids in the dev list
  // form `dev`, ids in the test list form `test`, everything else `train`.
  std::optional<std::filesystem::path> dev_list;
  std::optional<std::filesystem::path> test_list;
};

// Reads a MultiWOZ 2.x data.json. User turns sit at even log positions; the
// following system entry's metadata carries the cumulative belief state.
// Throws FormatError on malformed input and SchemaViolation (with the
// dialogue id) on slots the schema does not know.
DialogueDataset load_multiwoz(const std::filesystem::path& path, const Schema& schema,
                              const MultiwozLoadOptions& options = {});
DialogueDataset parse_multiwoz(const std::string& json_text, const Schema& schema,
                               const MultiwozLoadOptions& options = {});

// One dialogue per line, keys in a fixed order.
void write_canonical_jsonl(const DialogueDataset& dataset, std::ostream& out);
void write_canonical_jsonl(const DialogueDataset& dataset, const std::filesystem::path& path);
DialogueDataset read_canonical_jsonl(std::istream& in, const Schema& schema,
                                     Split split = Split::train);
DialogueDataset read_canonical_jsonl(const std::filesystem::path& path, const Schema& schema,
                                     Split split = Split::train);

// Seeded sample of ceil(fraction * N) whole dialogues, kept in dataset order.
// Throws ConfigError unless 0 < fraction <= 1.
DialogueDataset sample_fewshot(const DialogueDataset& dataset, double fraction,
                               std::uint64_t seed);

}  // namespace idic
