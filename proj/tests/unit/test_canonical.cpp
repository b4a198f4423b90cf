#include <doctest.h>

#include "idic/canonical.hpp"
#include "idic/errors.hpp"
#include "idic/rng.hpp"
#include "idic/state.hpp"

using namespace idic;

TEST_SUITE("canonical") {
  TEST_CASE("whitespace is trimmed") {
    CHECK(canonicalize_value("train", "arriveat", " 10:00 ") == "10:00");
  }

  TEST_CASE("values are lowercased") {
    CHECK(canonicalize_value("attraction", "area", "South") == "south");
  }

  TEST_CASE("default synonyms apply after lowercasing") {
    const auto& syn = default_multiwoz_schema().synonyms();
    CHECK(canonicalize_value("attraction", "area", "center", syn) == "centre");
    CHECK(canonicalize_value("attraction", "area", "Center", syn) == "centre");
    CHECK(canonicalize_value("hotel", "type", "guesthouse", syn) == "guest house");
    CHECK(canonicalize_value("restaurant", "food", "don't care", syn) == "dontcare");
  }

  TEST_CASE("clock hours lose their leading zero") {
    CHECK(canonicalize_value("train", "leaveat", "07:00") == "7:00");
    CHECK(canonicalize_value("train", "leaveat", "17:05") == "17:05");
  }

  TEST_CASE("surrounding quotes and inner whitespace runs") {
    CHECK(canonicalize_value("hotel", "name", "'the  gonville   hotel'") == "the gonville hotel");
    CHECK(canonicalize_value("attraction", "name", "king's college") == "king's college");
  }

  TEST_CASE("deletion marker survives in any case") {
    CHECK(canonicalize_value("hotel", "area", "[DELETE]") == kDeleteMarker);
    CHECK(canonicalize_value("hotel", "area", " [delete] ") == kDeleteMarker);
  }

  TEST_CASE("empty values are rejected") {
    CHECK_THROWS_AS(canonicalize_value("hotel", "area", "   "), EmptyValue);
    CHECK_THROWS_AS(canonicalize_value("hotel", "area", "''"), EmptyValue);
  }

  TEST_CASE("canonicalization is idempotent on random text") {
    const auto& syn = default_multiwoz_schema().synonyms();
    const std::string alphabet = " \t'\"abcXYZ09:-[]DELTEcenter";
    DeterministicRng rng(5);
    int checked = 0;
    for (int i = 0; i < 5000; ++i) {
      std::string raw;
      const auto len = rng.below(16);
      for (std::uint64_t j = 0; j < len; ++j) raw.push_back(alphabet[rng.below(alphabet.size())]);
      std::string once;
      try {
        once = canonicalize_value("hotel", "area", raw, syn);
      } catch (const EmptyValue&) {
        continue;
      }
      CHECK(canonicalize_value("hotel", "area", once, syn) == once);
      ++checked;
    }
    CHECK(checked > 1000);
  }
}
