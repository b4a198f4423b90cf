#include "idic/state.hpp"

#include <set>

#include "idic/errors.hpp"

namespace idic {

std::string flat_key(const SlotKey& key) { return key.domain + "-" + key.slot; }

SlotKey parse_flat_key(std::string_view flat) {
  auto dash = flat.find('-');
  if (dash == std::string_view::npos || dash == 0 || dash + 1 == flat.size()) {
    throw FormatError("expected 'domain-slot', got '" + std::string(flat) + "'");
  }
  return {std::string(flat.substr(0, dash)), std::string(flat.substr(dash + 1))};
}

DialogueState::DialogueState(std::initializer_list<Map::value_type> init) {
  for (const auto& [k, v] : init) set(k, v);
}

DialogueState::DialogueState(Map entries) {
  for (auto& [k, v] : entries) set(k, std::move(v));
}

const std::string* DialogueState::find(const SlotKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void DialogueState::set(SlotKey key, std::string value) {
  if (value == kDeleteMarker) {
    throw SchemaViolation("deletion marker cannot be stored in a dialogue state (" +
                          flat_key(key) + ")");
  }
  entries_.insert_or_assign(std::move(key), std::move(value));
}

void DialogueState::erase(const SlotKey& key) { entries_.erase(key); }

DialogueState DialogueState::domain_view(std::string_view domain) const {
  DialogueState out;
  for (const auto& [k, v] : entries_) {
    if (k.domain == domain) out.entries_.emplace(k, v);
  }
  return out;
}

void DialogueState::validate(const Schema& schema) const {
  for (const auto& [k, v] : entries_) {
    if (!schema.has_slot(k.domain, k.slot)) {
      throw SchemaViolation("unknown slot '" + flat_key(k) + "'");
    }
    if (v.empty()) throw SchemaViolation("empty value for '" + flat_key(k) + "'");
  }
}

StateChange::StateChange(std::initializer_list<SlotValuePair> init) {
  for (const auto& p : init) set(p.key, p.value);
}

StateChange::StateChange(Map pairs) : pairs_(std::move(pairs)) {}

void StateChange::set(SlotKey key, std::string value) {
  pairs_.insert_or_assign(std::move(key), std::move(value));
}

std::vector<SlotValuePair> StateChange::items() const {
  std::vector<SlotValuePair> out;
  out.reserve(pairs_.size());
  for (const auto& [k, v] : pairs_) out.push_back({k, v});
  return out;
}

std::vector<std::string> StateChange::domains() const {
  std::set<std::string> seen;
  for (const auto& [k, _] : pairs_) seen.insert(k.domain);
  return {seen.begin(), seen.end()};
}

StateChange StateChange::without_deletions() const {
  StateChange out;
  for (const auto& [k, v] : pairs_) {
    if (v != kDeleteMarker) out.pairs_.emplace(k, v);
  }
  return out;
}

void StateChange::validate(const Schema& schema) const {
  for (const auto& [k, v] : pairs_) {
    if (!schema.has_slot(k.domain, k.slot)) {
      throw SchemaViolation("unknown slot '" + flat_key(k) + "'");
    }
    if (v.empty()) throw SchemaViolation("empty value for '" + flat_key(k) + "'");
  }
}

StateChange state_diff(const DialogueState& prev, const DialogueState& curr) {
  StateChange::Map out;
  const auto& a = prev.entries();
  const auto& b = curr.entries();
  auto ia = a.begin();
  auto ib = b.begin();
  // Merge walk over the two sorted maps.
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      out.emplace(ia->first, std::string(kDeleteMarker));
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      out.emplace(ib->first, ib->second);
      ++ib;
    } else {
      if (ia->second != ib->second) out.emplace(ib->first, ib->second);
      ++ia;
      ++ib;
    }
  }
  return StateChange(std::move(out));
}

DialogueState apply_delta(const DialogueState& prev, const StateChange& delta,
                          const Schema& schema) {
  delta.validate(schema);
  return apply_delta(prev, delta);
}

DialogueState apply_delta(const DialogueState& prev, const StateChange& delta) {
  DialogueState next = prev;
  for (const auto& [k, v] : delta.pairs()) {
    if (v == kDeleteMarker) {
      next.erase(k);
    } else {
      next.set(k, v);
    }
  }
  return next;
}

namespace {

template <typename M>
std::string render_map(const M& m) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : m) {
    if (!first) out += ", ";
    first = false;
    out += flat_key(k) + "=" + v;
  }
  return out + "}";
}

}  // namespace

std::string to_string(const StateChange& change) { return render_map(change.pairs()); }
std::string to_string(const DialogueState& state) { return render_map(state.entries()); }

}  // namespace idic
