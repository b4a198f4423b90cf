#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace idic {

// Value rewrites applied after lowercasing ("center" -> "centre"). A target
// may never itself be a source, which keeps canonicalization idempotent.
class SynonymTable {
 public:
  SynonymTable() = default;
  explicit SynonymTable(std::map<std::string, std::string> rewrites);

  static SynonymTable multiwoz_default();

  std::string_view apply(std::string_view value) const;
  const std::map<std::string, std::string, std::less<>>& rewrites() const noexcept { return rewrites_; }

  bool operator==(const SynonymTable&) const = default;

 private:
  std::map<std::string, std::string, std::less<>> rewrites_;
};

// Domains map to SQL tables and slots to columns. Domain and slot order is
// preserved because it drives DDL rendering.
class Schema {
 public:
  Schema() = default;

  // Throws SchemaViolation when names are empty, duplicated, contain
  // whitespace / uppercase, or a categorical key names an unknown slot.
  Schema(std::vector<std::string> domains, std::map<std::string, std::vector<std::string>> slots,
         std::map<std::string, std::vector<std::string>> categorical = {},
         SynonymTable synonyms = {});

  const std::vector<std::string>& domains() const noexcept { return domains_; }
  const std::vector<std::string>& slots(std::string_view domain) const;
  const std::map<std::string, std::vector<std::string>>& categorical() const noexcept {
    return categorical_;
  }
  const SynonymTable& synonyms() const noexcept { return synonyms_; }

  bool has_domain(std::string_view domain) const;
  bool has_slot(std::string_view domain, std::string_view slot) const;
  std::size_t slot_count() const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<std::string> domains_;
  std::map<std::string, std::vector<std::string>, std::less<>> slots_;
  std::map<std::string, std::vector<std::string>> categorical_;
  SynonymTable synonyms_;
};

// {"domains": {"hotel": ["area", ...]}, "categorical": {"hotel-area": [...]},
//  "synonyms": {"center": "centre"}}. Domain order follows document order.
Schema schema_from_json(const nlohmann::ordered_json& doc);
Schema load_schema(const std::filesystem::path& path);
nlohmann::ordered_json schema_to_json(const Schema& schema);

// The seven MultiWOZ domains with their tracked slots.
const Schema& default_multiwoz_schema();

}  // namespace idic
