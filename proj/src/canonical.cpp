#include "idic/canonical.hpp"

#include <cctype>

#include "idic/errors.hpp"
#include "idic/state.hpp"

namespace idic {
namespace {

std::string collapse_lower(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

bool is_quote(char c) { return c == '"' || c == '\''; }

void strip_quotes(std::string& v) {
  while (v.size() >= 2 && is_quote(v.front()) && v.front() == v.back()) {
    v = collapse_lower(std::string_view(v).substr(1, v.size() - 2));
  }
}

// "07:00" -> "7:00"; anything that is not H:MM / HH:MM is left alone.
void normalize_clock(std::string& v) {
  auto colon = v.find(':');
  if (colon == std::string::npos || colon == 0 || colon > 2 || v.size() != colon + 3) return;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != colon && !std::isdigit(static_cast<unsigned char>(v[i]))) return;
  }
  int hour = std::stoi(v.substr(0, colon));
  v = std::to_string(hour) + v.substr(colon);
}

}  // namespace

std::string canonicalize_value(std::string_view domain, std::string_view slot,
                               std::string_view raw, const SynonymTable& synonyms) {
  std::string v = collapse_lower(raw);
  strip_quotes(v);
  if (v == "[delete]") return std::string(kDeleteMarker);
  v = std::string(synonyms.apply(v));
  normalize_clock(v);
  if (v.empty()) {
    throw EmptyValue("empty value for '" + std::string(domain) + "-" + std::string(slot) + "'");
  }
  return v;
}

std::string canonicalize_value(std::string_view domain, std::string_view slot,
                               std::string_view raw) {
  return canonicalize_value(domain, slot, raw, default_multiwoz_schema().synonyms());
}

}  // namespace idic
