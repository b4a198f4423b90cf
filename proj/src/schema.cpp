#include "idic/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "idic/errors.hpp"

namespace idic {
namespace {

// Names become SQL identifiers and flat "domain-slot" keys, so they are
// restricted to lowercase identifier characters.
bool is_identifier(std::string_view name) {
  if (name.empty() || (name[0] >= '0' && name[0] <= '9')) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

constexpr const char* kDefaultSchemaJson = R"json({
  "domains": {
    "attraction": ["area", "name", "type"],
    "hospital": ["department"],
    "hotel": ["area", "book_day", "book_people", "book_stay", "internet", "name", "parking",
              "pricerange", "stars", "type"],
    "police": ["name"],
    "restaurant": ["area", "book_day", "book_people", "book_time", "food", "name", "pricerange"],
    "taxi": ["arriveby", "departure", "destination", "leaveat"],
    "train": ["arriveby", "book_people", "day", "departure", "destination", "leaveat"]
  },
  "categorical": {
    "attraction-area": ["centre", "east", "north", "south", "west"],
    "hotel-area": ["centre", "east", "north", "south", "west"],
    "restaurant-area": ["centre", "east", "north", "south", "west"],
    "hotel-internet": ["yes", "no", "free"],
    "hotel-parking": ["yes", "no", "free"],
    "hotel-pricerange": ["cheap", "moderate", "expensive"],
    "restaurant-pricerange": ["cheap", "moderate", "expensive"],
    "hotel-stars": ["0", "1", "2", "3", "4", "5"],
    "hotel-type": ["hotel", "guest house"],
    "hotel-book_day": ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"],
    "restaurant-book_day": ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"],
    "train-day": ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
  },
  "synonyms": {
    "center": "centre",
    "don't care": "dontcare",
    "do n't care": "dontcare",
    "dont care": "dontcare",
    "guesthouse": "guest house",
    "guesthouses": "guest house",
    "concerthall": "concert hall",
    "swimmingpool": "swimming pool",
    "mutliple sports": "multiple sports"
  }
})json";

}  // namespace

SynonymTable::SynonymTable(std::map<std::string, std::string> rewrites)
    : rewrites_(rewrites.begin(), rewrites.end()) {
  for (const auto& [from, to] : rewrites_) {
    if (from.empty() || to.empty()) throw SchemaViolation("synonym entries must be nonempty");
    if (rewrites_.contains(to)) {
      throw SchemaViolation("synonym target '" + to + "' is also a synonym source");
    }
  }
}

SynonymTable SynonymTable::multiwoz_default() { return default_multiwoz_schema().synonyms(); }

std::string_view SynonymTable::apply(std::string_view value) const {
  if (auto it = rewrites_.find(value); it != rewrites_.end()) return it->second;
  return value;
}

Schema::Schema(std::vector<std::string> domains,
               std::map<std::string, std::vector<std::string>> slots,
               std::map<std::string, std::vector<std::string>> categorical, SynonymTable synonyms)
    : domains_(std::move(domains)),
      slots_(slots.begin(), slots.end()),
      categorical_(std::move(categorical)),
      synonyms_(std::move(synonyms)) {
  std::set<std::string> seen;
  for (const auto& d : domains_) {
    if (!is_identifier(d)) throw SchemaViolation("invalid domain name '" + d + "'");
    if (d == "none") throw SchemaViolation("domain name 'none' is reserved");
    if (!seen.insert(d).second) throw SchemaViolation("duplicate domain '" + d + "'");
    auto it = slots_.find(d);
    if (it == slots_.end()) throw SchemaViolation("domain '" + d + "' has no slot list");
    if (it->second.empty()) throw SchemaViolation("domain '" + d + "' has no slots");
    std::set<std::string> seen_slots;
    for (const auto& s : it->second) {
      if (!is_identifier(s)) throw SchemaViolation("invalid slot name '" + d + "-" + s + "'");
      if (!seen_slots.insert(s).second) {
        throw SchemaViolation("duplicate slot '" + s + "' in domain '" + d + "'");
      }
    }
  }
  for (const auto& [d, _] : slots_) {
    if (!seen.contains(d)) throw SchemaViolation("slot list for undeclared domain '" + d + "'");
  }
  for (const auto& [key, _] : categorical_) {
    auto dash = key.find('-');
    if (dash == std::string::npos || !has_slot(key.substr(0, dash), key.substr(dash + 1))) {
      throw SchemaViolation("categorical key '" + key + "' names no schema slot");
    }
  }
}

const std::vector<std::string>& Schema::slots(std::string_view domain) const {
  auto it = slots_.find(domain);
  if (it == slots_.end()) throw SchemaViolation("unknown domain '" + std::string(domain) + "'");
  return it->second;
}

bool Schema::has_domain(std::string_view domain) const { return slots_.contains(domain); }

bool Schema::has_slot(std::string_view domain, std::string_view slot) const {
  auto it = slots_.find(domain);
  if (it == slots_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), slot) != it->second.end();
}

std::size_t Schema::slot_count() const {
  std::size_t n = 0;
  for (const auto& [_, s] : slots_) n += s.size();
  return n;
}

Schema schema_from_json(const nlohmann::ordered_json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("domains") || !doc["domains"].is_object()) {
      throw FormatError("schema document needs a \"domains\" object");
    }
    for (const auto& [key, _] : doc.items()) {
      if (key != "domains" && key != "categorical" && key != "synonyms") {
        throw FormatError("unknown schema field '" + key + "'");
      }
    }
    std::vector<std::string> domains;
    std::map<std::string, std::vector<std::string>> slots;
    for (const auto& [domain, list] : doc["domains"].items()) {
      domains.push_back(domain);
      slots[domain] = list.get<std::vector<std::string>>();
    }
    std::map<std::string, std::vector<std::string>> categorical;
    if (doc.contains("categorical")) {
      categorical = doc["categorical"].get<std::map<std::string, std::vector<std::string>>>();
    }
    std::map<std::string, std::string> synonyms;
    if (doc.contains("synonyms")) {
      synonyms = doc["synonyms"].get<std::map<std::string, std::string>>();
    }
    return Schema(std::move(domains), std::move(slots), std::move(categorical),
                  SynonymTable(std::move(synonyms)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed schema document: ") + e.what());
  }
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open schema file " + path.string());
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("schema file " + path.string() + ": " + e.what());
  }
  return schema_from_json(doc);
}

nlohmann::ordered_json schema_to_json(const Schema& schema) {
  nlohmann::ordered_json doc;
  doc["domains"] = nlohmann::ordered_json::object();
  for (const auto& d : schema.domains()) doc["domains"][d] = schema.slots(d);
  doc["categorical"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : schema.categorical()) doc["categorical"][k] = v;
  doc["synonyms"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : schema.synonyms().rewrites()) doc["synonyms"][k] = v;
  return doc;
}

const Schema& default_multiwoz_schema() {
  static const Schema schema = schema_from_json(nlohmann::ordered_json::parse(kDefaultSchemaJson));
  return schema;
}

}  // namespace idic
