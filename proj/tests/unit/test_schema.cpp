#include <doctest.h>

#include "idic/errors.hpp"
#include "idic/schema.hpp"

using namespace idic;

TEST_SUITE("schema") {
  TEST_CASE("default schema has the seven MultiWOZ domains") {
    const Schema& s = default_multiwoz_schema();
    CHECK(s.domains() == std::vector<std::string>{"attraction", "hospital", "hotel", "police",
                                                  "restaurant", "taxi", "train"});
    CHECK(s.has_slot("hotel", "book_stay"));
    CHECK(s.has_slot("train", "arriveby"));
    CHECK_FALSE(s.has_slot("train", "arriveat"));
    CHECK_FALSE(s.has_domain("bus"));
  }

  TEST_CASE("invalid schemas are rejected") {
    CHECK_THROWS_AS(Schema({"none"}, {{"none", {"x"}}}), SchemaViolation);
    CHECK_THROWS_AS(Schema({"hotel", "hotel"}, {{"hotel", {"area"}}}), SchemaViolation);
    CHECK_THROWS_AS(Schema({"hotel"}, {{"hotel", {}}}), SchemaViolation);
    CHECK_THROWS_AS(Schema({"Hotel"}, {{"Hotel", {"area"}}}), SchemaViolation);
    CHECK_THROWS_AS(Schema({"hotel"}, {{"hotel", {"area", "area"}}}), SchemaViolation);
  }

  TEST_CASE("synonym targets may not also be sources") {
    CHECK_THROWS(SynonymTable({{"a", "b"}, {"b", "c"}}));
  }

  TEST_CASE("json round trip") {
    const Schema& s = default_multiwoz_schema();
    CHECK(schema_from_json(schema_to_json(s)) == s);
  }

  TEST_CASE("unknown top-level fields are rejected") {
    auto doc = schema_to_json(default_multiwoz_schema());
    doc["extra"] = 1;
    CHECK_THROWS_AS(schema_from_json(doc), FormatError);
  }

  TEST_CASE("bundled schema file matches the built-in schema") {
    CHECK(load_schema(IDIC_DATA_DIR "/multiwoz_schema.json") == default_multiwoz_schema());
  }
}
