#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idic/intent.hpp"
#include "idic/retrieval.hpp"
#include "idic/schema.hpp"
#include "idic/state.hpp"

namespace idic {

// One `CREATE TABLE domain(slot text, ...);` line per domain, schema order.
struct SqlSchemaText {
  std::string ddl;
};

SqlSchemaText schema_to_ddl(const Schema& schema);

inline constexpr std::string_view kNoChangeSql = "SELECT * FROM none;";

// SELECT * FROM a AS d1, b AS d2 WHERE d1.x = 'v' AND d2.y = 'w';
// Domains sorted by name and aliased d1..dn, conjuncts in slot order,
// single quotes doubled. An empty delta encodes as kNoChangeSql.
// Throws SchemaViolation for slots outside the schema or empty values.
std::string encode_delta_as_sql(const StateChange& delta, const Schema& schema);

enum class ParseStatus { ok, sentinel, error };

// How much leniency the parser needed, in increasing order.
enum class ParseTier { exact, bare_slot, junk_stripped };

enum class SqlErrorKind { parse_error, unknown_domain, unknown_slot, ambiguous_bare_slot };

struct SqlError {
  SqlErrorKind kind = SqlErrorKind::parse_error;
  std::string message;
  std::size_t offset = 0;  // byte span into the parsed text
  std::size_t length = 0;
};

struct TableRef {
  std::string domain;
  std::string alias;

  bool operator==(const TableRef&) const = default;
};

struct ParsedSql {
  std::vector<TableRef> referenced_domains;
  StateChange where_pairs;
  ParseStatus status = ParseStatus::error;
  ParseTier tier = ParseTier::exact;
  std::optional<SqlError> error;

  bool ok() const noexcept { return status != ParseStatus::error; }
};

std::string to_string(ParseStatus status);
std::string to_string(ParseTier tier);
std::string to_string(SqlErrorKind kind);

// Extracts the first `SELECT ... FROM ... [WHERE ...]` statement of
// arbitrary model output and resolves its equality conjuncts to a state
// change. Never throws; failures come back as status == error with an
// error span, and where_pairs empty. Runs in time linear in the input.
ParsedSql parse_sql(std::string_view generated, const Schema& schema);

struct Prompt {
  std::string text;
  int example_count = 0;
  int token_estimate = 0;
};

inline constexpr std::string_view kPromptInstruction =
    "-- Using valid SQL, complete the dialogue state change for the conversation below.";
inline constexpr int kDefaultPromptBudget = 3500;

// ceil(characters / 4).
int estimate_tokens(std::string_view text);

// "{masked context}\nSQL: {encoded delta}" for one pool turn.
std::string render_example_block(const std::string& masked_context, const StateChange& delta,
                                 const Schema& schema);

// ddl, instruction, "Example #i" + block for each example, the current
// augmented context, then "SQL:". Throws PromptTooLarge when the token
// estimate exceeds `budget`.
Prompt build_prompt(const SqlSchemaText& ddl, std::span<const ScoredExample> examples,
                    const AugmentedDialogueInformation& current,
                    int budget = kDefaultPromptBudget);

// Drops the lowest-ranked examples until the prompt fits; rethrows
// PromptTooLarge only when even the bare prompt does not.
Prompt build_prompt_within_budget(const SqlSchemaText& ddl,
                                  std::span<const ScoredExample> examples,
                                  const AugmentedDialogueInformation& current,
                                  int budget = kDefaultPromptBudget);

}  // namespace idic
