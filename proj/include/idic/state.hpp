#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idic/schema.hpp"

namespace idic {

// Reserved value meaning "remove this slot". Only ever appears in a
// StateChange, never in a DialogueState.
inline constexpr std::string_view kDeleteMarker = "[DELETE]";

struct SlotKey {
  std::string domain;
  std::string slot;

  auto operator<=>(const SlotKey&) const = default;
  bool operator==(const SlotKey&) const = default;
};

struct SlotValuePair {
  SlotKey key;
  std::string value;

  bool is_deletion() const noexcept { return value == kDeleteMarker; }

  auto operator<=>(const SlotValuePair&) const = default;
  bool operator==(const SlotValuePair&) const = default;
};

// "hotel-area" <-> {hotel, area}. Split happens at the first '-'.
std::string flat_key(const SlotKey& key);
SlotKey parse_flat_key(std::string_view flat);

class DialogueState {
 public:
  using Map = std::map<SlotKey, std::string>;

  DialogueState() = default;
  DialogueState(std::initializer_list<Map::value_type> init);
  explicit DialogueState(Map entries);

  const Map& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  const std::string* find(const SlotKey& key) const;
  void set(SlotKey key, std::string value);
  void erase(const SlotKey& key);

  // Entries restricted to one domain.
  DialogueState domain_view(std::string_view domain) const;

  void validate(const Schema& schema) const;

  bool operator==(const DialogueState&) const = default;

 private:
  Map entries_;
};

// One turn's worth of slot updates, at most one value per (domain, slot).
class StateChange {
 public:
  using Map = std::map<SlotKey, std::string>;

  StateChange() = default;
  StateChange(std::initializer_list<SlotValuePair> init);
  explicit StateChange(Map pairs);

  const Map& pairs() const noexcept { return pairs_; }
  bool empty() const noexcept { return pairs_.empty(); }
  std::size_t size() const noexcept { return pairs_.size(); }

  // Later writes to the same key replace earlier ones.
  void set(SlotKey key, std::string value);
  std::vector<SlotValuePair> items() const;
  std::vector<std::string> domains() const;  // sorted, unique

  StateChange without_deletions() const;

  void validate(const Schema& schema) const;

  bool operator==(const StateChange&) const = default;

 private:
  Map pairs_;
};

StateChange state_diff(const DialogueState& prev, const DialogueState& curr);

// Throws SchemaViolation when the delta names a slot the schema lacks.
DialogueState apply_delta(const DialogueState& prev, const StateChange& delta,
                          const Schema& schema);
// Unchecked variant for callers that already validated the delta.
DialogueState apply_delta(const DialogueState& prev, const StateChange& delta);

// "{hotel-area=south, train-day=monday}" for diagnostics and CLI output.
std::string to_string(const StateChange& change);
std::string to_string(const DialogueState& state);

}  // namespace idic
