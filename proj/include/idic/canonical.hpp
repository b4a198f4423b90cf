#pragma once

#include <string>
#include <string_view>

#include "idic/schema.hpp"

namespace idic {

// Normalizes a slot value for exact-match comparison: trims and collapses
// whitespace, lowercases, strips one level of surrounding quotes, drops the
// leading zero of clock hours ("07:00" -> "7:00") and applies the synonym
// table. The deletion marker passes through untouched. Idempotent.
//
// Throws EmptyValue when nothing is left.
std::string canonicalize_value(std::string_view domain, std::string_view slot,
                               std::string_view raw, const SynonymTable& synonyms);

std::string canonicalize_value(std::string_view domain, std::string_view slot,
                               std::string_view raw);

}  // namespace idic
