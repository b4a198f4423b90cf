#include <doctest.h>

#include <json.hpp>

#include "idic/embedding.hpp"
#include "idic/errors.hpp"

#include "http_stub.hpp"

using namespace idic;

TEST_SUITE("embedding") {
  TEST_CASE("lexical vectors are unit length and deterministic") {
    LexicalEmbedding lex;
    auto a = lex.embed("i want a hotel in the south");
    CHECK(a.components.size() == LexicalEmbedding::kDimension);
    CHECK(a.components.norm() == doctest::Approx(1.0));
    CHECK(lex.embed("i want a hotel in the south").components == a.components);
    CHECK(a.provider_id == lex.id());
  }

  TEST_CASE("texts sharing no trigrams have cosine 0") {
    LexicalEmbedding lex;
    auto a = lex.embed("abcabcabc");
    auto b = lex.embed("xyzxyzxyz");
    CHECK(cosine(a.components, b.components) == 0.0);
  }

  TEST_CASE("identical texts have cosine 1; the empty text is the zero vector") {
    LexicalEmbedding lex;
    auto a = lex.embed("the gonville hotel");
    CHECK(cosine(a.components, a.components) == doctest::Approx(1.0));
    CHECK(lex.embed("").components.norm() == 0.0);
    CHECK(cosine(lex.embed("").components, a.components) == 0.0);
    CHECK(lex.embed("ab").components.norm() == doctest::Approx(1.0));
  }

  TEST_CASE("index rejects queries from a different provider") {
    LexicalEmbedding lex;
    std::vector<std::string> texts = {"a hotel", "a train"};
    auto index = EmbeddingIndex::build(lex, texts);
    EmbeddingVector foreign{lex.embed("a hotel").components, "other"};
    CHECK_THROWS_AS(index.cosine_scores(foreign), Error);
    auto s = index.cosine_scores(lex.embed("a hotel"));
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[0] > s[1]);
  }

  TEST_CASE("remote embedding protocol") {
    testing::StubServer stub;
    int calls = 0;
    stub.server().Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      auto body = nlohmann::json::parse(req.body);
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& t : body.at("texts")) {
        const auto s = t.get<std::string>();
        rows.push_back({static_cast<double>(s.size()), 1.0, 0.0});
      }
      res.set_content(nlohmann::json{{"embeddings", rows}, {"dim", 3}}.dump(), "application/json");
    });
    stub.start();
    HttpEndpoint ep;
    ep.base_url = stub.url();
    ep.retries = 0;
    RemoteEmbedding remote(ep, 2);
    std::vector<std::string> texts = {"a", "bb", "ccc", "dddd", "eeeee"};
    auto out = remote.embed_batch(texts);
    REQUIRE(out.size() == 5);
    CHECK(calls == 3);
    CHECK(out[3].components[0] == 4.0);
    CHECK(out[3].provider_id == remote.id());
    auto index = EmbeddingIndex::build(remote, texts);
    CHECK(index.size() == 5);
    CHECK(remote.embed_batch(std::vector<std::string>{}).empty());
  }

  TEST_CASE("remote embedding rejects malformed replies") {
    testing::StubServer stub;
    stub.server().Post("/embed", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"embeddings": [[1, 2]], "dim": 3})", "application/json");
    });
    stub.start();
    HttpEndpoint ep;
    ep.base_url = stub.url();
    ep.retries = 0;
    RemoteEmbedding remote(ep);
    CHECK_THROWS_AS(remote.embed("x"), DecodeError);
    CHECK_THROWS_AS(remote.embed_batch(std::vector<std::string>{"a", "b"}), DecodeError);
  }
}
