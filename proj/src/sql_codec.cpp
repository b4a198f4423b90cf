#include "idic/sql_codec.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "idic/canonical.hpp"
#include "idic/errors.hpp"

namespace idic {

SqlSchemaText schema_to_ddl(const Schema& schema) {
  std::string ddl;
  for (const auto& domain : schema.domains()) {
    if (!ddl.empty()) ddl += '\n';
    ddl += "CREATE TABLE " + domain + "(";
    const auto& slots = schema.slots(domain);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (i > 0) ddl += ", ";
      ddl += slots[i] + " text";
    }
    ddl += ");";
  }
  return {ddl};
}

std::string encode_delta_as_sql(const StateChange& delta, const Schema& schema) {
  delta.validate(schema);
  if (delta.empty()) return std::string(kNoChangeSql);

  std::map<std::string, std::string> alias;
  std::string from;
  for (const auto& domain : delta.domains()) {
    std::string a = "d" + std::to_string(alias.size() + 1);
    from += (alias.empty() ? "" : ", ") + domain + " AS " + a;
    alias.emplace(domain, std::move(a));
  }
  std::string where;
  for (const auto& [k, v] : delta.pairs()) {
    std::string quoted;
    for (char c : v) {
      quoted.push_back(c);
      if (c == '\'') quoted.push_back('\'');
    }
    where += (where.empty() ? "" : " AND ") + alias.at(k.domain) + "." + k.slot + " = '" +
             quoted + "'";
  }
  return "SELECT * FROM " + from + " WHERE " + where + ";";
}

std::string to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::ok: return "ok";
    case ParseStatus::sentinel: return "sentinel";
    case ParseStatus::error: return "error";
  }
  return "error";
}

std::string to_string(ParseTier tier) {
  switch (tier) {
    case ParseTier::exact: return "exact";
    case ParseTier::bare_slot: return "bare_slot";
    case ParseTier::junk_stripped: return "junk_stripped";
  }
  return "exact";
}

std::string to_string(SqlErrorKind kind) {
  switch (kind) {
    case SqlErrorKind::parse_error: return "ParseError";
    case SqlErrorKind::unknown_domain: return "UnknownDomain";
    case SqlErrorKind::unknown_slot: return "UnknownSlot";
    case SqlErrorKind::ambiguous_bare_slot: return "AmbiguousBareSlot";
  }
  return "ParseError";
}

namespace {

struct Token {
  enum Kind { ident, string, number, punct, bad, end } kind = end;
  std::string text;  // identifiers lowercased; strings unescaped
  std::size_t offset = 0;
  std::size_t length = 0;
};

bool ident_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Finds the first case-insensitive "select" keyword on word boundaries.
std::size_t find_select(std::string_view text) {
  static constexpr std::string_view kw = "select";
  for (std::size_t i = 0; i + kw.size() <= text.size(); ++i) {
    if ((i > 0 && ident_char(text[i - 1])) ||
        (i + kw.size() < text.size() && ident_char(text[i + kw.size()]))) {
      continue;
    }
    bool match = true;
    for (std::size_t j = 0; j < kw.size() && match; ++j) {
      match = std::tolower(static_cast<unsigned char>(text[i + j])) == kw[j];
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

// Tokenizes from `start` up to the first ';' outside quotes. `stop` is set
// to the offset just past the terminator (or the end of text).
std::vector<Token> lex(std::string_view text, std::size_t start, std::size_t& stop) {
  std::vector<Token> out;
  std::size_t p = start;
  while (p < text.size()) {
    char c = text[p];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++p;
      continue;
    }
    if (c == ';') {
      stop = p + 1;
      out.push_back({Token::end, "", p, 1});
      return out;
    }
    Token t;
    t.offset = p;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (p < text.size() && ident_char(text[p])) ++p;
      t.kind = Token::ident;
      t.text = lower(text.substr(t.offset, p - t.offset));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (p < text.size() && (ident_char(text[p]) || text[p] == ':' || text[p] == '.')) ++p;
      t.kind = Token::number;
      t.text = std::string(text.substr(t.offset, p - t.offset));
    } else if (c == '\'' || c == '"' || c == '`') {
      const char q = c;
      ++p;
      bool closed = false;
      while (p < text.size()) {
        if (text[p] == q) {
          if (p + 1 < text.size() && text[p + 1] == q) {
            t.text.push_back(q);
            p += 2;
            continue;
          }
          ++p;
          closed = true;
          break;
        }
        t.text.push_back(text[p++]);
      }
      t.kind = !closed ? Token::bad : (q == '`' ? Token::ident : Token::string);
      if (q == '`') t.text = lower(t.text);
    } else if (c == ',' || c == '.' || c == '=' || c == '*' || c == '(' || c == ')') {
      ++p;
      t.kind = Token::punct;
      t.text = std::string(1, c);
    } else {
      ++p;
      t.kind = Token::bad;
      t.text = std::string(1, c);
    }
    t.length = p - t.offset;
    out.push_back(std::move(t));
  }
  stop = text.size();
  out.push_back({Token::end, "", text.size(), 0});
  return out;
}

bool is_keyword(const Token& t, std::string_view kw) { return t.kind == Token::ident && t.text == kw; }

bool reserved(const Token& t) {
  return is_keyword(t, "where") || is_keyword(t, "and") || is_keyword(t, "from") ||
         is_keyword(t, "limit") || is_keyword(t, "order") || is_keyword(t, "group");
}

class StatementParser {
 public:
  StatementParser(std::vector<Token> tokens, const Schema& schema)
      : toks_(std::move(tokens)), schema_(schema) {}

  ParsedSql run() {
    ParsedSql out;
    next();  // SELECT
    while (cur().kind != Token::end && !is_keyword(cur(), "from")) next();
    if (cur().kind == Token::end) return fail(SqlErrorKind::parse_error, "missing FROM", cur());
    next();

    std::map<std::string, std::string> aliases;  // alias or table name -> domain
    std::set<std::string> used_aliases;
    while (true) {
      const Token& table = cur();
      if (table.kind != Token::ident) return fail(SqlErrorKind::parse_error, "expected table", table);
      if (table.text == "none" && out.referenced_domains.empty()) {
        out.status = ParseStatus::sentinel;
        trailing_junk_ = !is_end_after_sentinel();
        return out;
      }
      if (!schema_.has_domain(table.text)) {
        return fail(SqlErrorKind::unknown_domain, "unknown table '" + table.text + "'", table);
      }
      TableRef ref{table.text, table.text};
      next();
      if (is_keyword(cur(), "as")) {
        next();
        if (cur().kind != Token::ident) return fail(SqlErrorKind::parse_error, "expected alias", cur());
        ref.alias = cur().text;
        next();
      } else if (cur().kind == Token::ident && !reserved(cur())) {
        ref.alias = cur().text;
        next();
      }
      if (!used_aliases.insert(ref.alias).second) {
        return fail(SqlErrorKind::parse_error, "duplicate alias '" + ref.alias + "'",
                    toks_[pos_ - 1]);
      }
      aliases[ref.alias] = ref.domain;
      aliases.try_emplace(ref.domain, ref.domain);
      out.referenced_domains.push_back(std::move(ref));
      if (cur().kind == Token::punct && cur().text == ",") {
        next();
        continue;
      }
      break;
    }

    if (is_keyword(cur(), "where")) {
      next();
      while (true) {
        if (auto err = condition(out, aliases)) return *err;
        if (is_keyword(cur(), "and")) {
          next();
          continue;
        }
        break;
      }
    }
    if (cur().kind != Token::end) trailing_junk_ = true;
    out.status = ParseStatus::ok;
    if (bare_used_) out.tier = ParseTier::bare_slot;
    return out;
  }

  bool trailing_junk() const { return trailing_junk_; }

 private:
  const Token& cur() const { return toks_[pos_]; }
  void next() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }

  bool is_end_after_sentinel() {
    next();
    return cur().kind == Token::end;
  }

  ParsedSql fail(SqlErrorKind kind, std::string message, const Token& at) {
    ParsedSql out;
    out.status = ParseStatus::error;
    out.error = SqlError{kind, std::move(message), at.offset, at.length};
    return out;
  }

  std::optional<ParsedSql> condition(ParsedSql& out,
                                     const std::map<std::string, std::string>& aliases) {
    const Token first = cur();
    if (first.kind != Token::ident) return fail(SqlErrorKind::parse_error, "expected column", first);
    next();
    std::string domain;
    std::string slot;
    Token slot_tok = first;
    if (cur().kind == Token::punct && cur().text == ".") {
      next();
      if (cur().kind != Token::ident) return fail(SqlErrorKind::parse_error, "expected column", cur());
      slot_tok = cur();
      slot = cur().text;
      next();
      auto it = aliases.find(first.text);
      if (it == aliases.end()) {
        return fail(SqlErrorKind::unknown_domain, "unknown alias '" + first.text + "'", first);
      }
      domain = it->second;
    } else {
      slot = first.text;
      if (out.referenced_domains.size() != 1) {
        return fail(SqlErrorKind::ambiguous_bare_slot,
                    "bare column '" + slot + "' with several tables", first);
      }
      domain = out.referenced_domains.front().domain;
      bare_used_ = true;
    }
    if (!schema_.has_slot(domain, slot)) {
      return fail(SqlErrorKind::unknown_slot, "unknown column '" + domain + "." + slot + "'",
                  slot_tok);
    }
    if (!(cur().kind == Token::punct && cur().text == "=")) {
      return fail(SqlErrorKind::parse_error, "expected '='", cur());
    }
    next();
    const Token value = cur();
    if (value.kind != Token::string && value.kind != Token::number && value.kind != Token::ident) {
      return fail(SqlErrorKind::parse_error, "expected value", value);
    }
    next();
    try {
      out.where_pairs.set({domain, slot},
                          canonicalize_value(domain, slot, value.text, schema_.synonyms()));
    } catch (const EmptyValue&) {
      return fail(SqlErrorKind::parse_error, "empty value", value);
    }
    return std::nullopt;
  }

  std::vector<Token> toks_;
  const Schema& schema_;
  std::size_t pos_ = 0;
  bool bare_used_ = false;
  bool trailing_junk_ = false;
};

}  // namespace

ParsedSql parse_sql(std::string_view generated, const Schema& schema) {
  const std::size_t start = find_select(generated);
  if (start == std::string_view::npos) {
    ParsedSql out;
    out.error = SqlError{SqlErrorKind::parse_error, "no SELECT statement found", 0,
                         generated.size()};
    return out;
  }
  std::size_t stop = generated.size();
  StatementParser parser(lex(generated, start, stop), schema);
  ParsedSql out = parser.run();
  if (!out.ok()) return out;

  const bool leading = generated.substr(0, start).find_first_not_of(" \t\r\n") != std::string_view::npos;
  const bool trailing =
      stop < generated.size() &&
      generated.substr(stop).find_first_not_of(" \t\r\n") != std::string_view::npos;
  if (leading || trailing || parser.trailing_junk()) out.tier = ParseTier::junk_stripped;
  return out;
}

int estimate_tokens(std::string_view text) { return static_cast<int>((text.size() + 3) / 4); }

std::string render_example_block(const std::string& masked_context, const StateChange& delta,
                                 const Schema& schema) {
  return masked_context + "\nSQL: " + encode_delta_as_sql(delta, schema);
}

Prompt build_prompt(const SqlSchemaText& ddl, std::span<const ScoredExample> examples,
                    const AugmentedDialogueInformation& current, int budget) {
  Prompt prompt;
  std::string& text = prompt.text;
  text = ddl.ddl;
  if (!text.empty()) text += '\n';
  text += kPromptInstruction;
  text += '\n';
  for (const auto& e : examples) {
    ++prompt.example_count;
    text += "Example #" + std::to_string(prompt.example_count) + "\n";
    text += e.example.prompt_block + "\n";
  }
  text += serialize_context(current);
  text += "\nSQL:";
  prompt.token_estimate = estimate_tokens(text);
  if (prompt.token_estimate > budget) throw PromptTooLarge(prompt.token_estimate, budget);
  return prompt;
}

Prompt build_prompt_within_budget(const SqlSchemaText& ddl,
                                  std::span<const ScoredExample> examples,
                                  const AugmentedDialogueInformation& current, int budget) {
  for (std::size_t n = examples.size();; --n) {
    try {
      return build_prompt(ddl, examples.first(n), current, budget);
    } catch (const PromptTooLarge&) {
      if (n == 0) throw;
    }
  }
}

}  // namespace idic
