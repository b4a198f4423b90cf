#include "idic/embedding.hpp"

#include "idic/errors.hpp"
#include "idic/hash.hpp"

namespace idic {

EmbeddingVector EmbeddingProvider::embed(std::string_view text) const {
  std::string owned(text);
  auto out = embed_batch(std::span<const std::string>(&owned, 1));
  return std::move(out.at(0));
}

Eigen::VectorXd LexicalEmbedding::embed_text(std::string_view text) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kDimension);
  auto bucket = [](std::string_view gram) {
    return static_cast<Eigen::Index>(fnv1a64(gram) % static_cast<std::uint64_t>(kDimension));
  };
  if (text.empty()) return v;
  if (text.size() < 3) {
    v[bucket(text)] += 1.0;
  } else {
    for (std::size_t i = 0; i + 3 <= text.size(); ++i) v[bucket(text.substr(i, 3))] += 1.0;
  }
  v.normalize();
  return v;
}

std::vector<EmbeddingVector> LexicalEmbedding::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back({embed_text(t), id()});
  return out;
}

RemoteEmbedding::RemoteEmbedding(HttpEndpoint endpoint, std::size_t batch_size)
    : endpoint_(std::move(endpoint)), batch_size_(batch_size == 0 ? 1 : batch_size) {}

std::vector<EmbeddingVector> RemoteEmbedding::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  Eigen::Index dim = -1;
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    auto chunk = texts.subspan(start, std::min(batch_size_, texts.size() - start));
    nlohmann::json body;
    body["texts"] = std::vector<std::string>(chunk.begin(), chunk.end());
    nlohmann::json reply = post_json(endpoint_, "/embed", body);
    try {
      const auto& rows = reply.at("embeddings");
      if (!rows.is_array() || rows.size() != chunk.size()) {
        throw DecodeError("embedding service returned " + std::to_string(rows.size()) +
                          " vectors for " + std::to_string(chunk.size()) + " texts");
      }
      const auto reported = reply.at("dim").get<Eigen::Index>();
      if (dim < 0) dim = reported;
      if (reported != dim) throw DecodeError("embedding dimension changed between batches");
      for (const auto& row : rows) {
        auto values = row.get<std::vector<double>>();
        if (static_cast<Eigen::Index>(values.size()) != dim) {
          throw DecodeError("embedding row length does not match reported dim");
        }
        out.push_back({Eigen::Map<const Eigen::VectorXd>(values.data(), dim), id()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw DecodeError(std::string("malformed /embed reply: ") + e.what());
    }
  }
  return out;
}

EmbeddingIndex EmbeddingIndex::build(const EmbeddingProvider& provider,
                                     std::span<const std::string> texts) {
  EmbeddingIndex index;
  index.provider_id_ = provider.id();
  auto vectors = provider.embed_batch(texts);
  if (vectors.empty()) return index;
  const Eigen::Index dim = vectors.front().components.size();
  index.rows_.resize(static_cast<Eigen::Index>(vectors.size()), dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& c = vectors[i].components;
    if (c.size() != dim) throw DecodeError("embedding provider returned ragged vectors");
    const double n = c.norm();
    auto row = index.rows_.row(static_cast<Eigen::Index>(i));
    if (n > 0.0) {
      row = (c / n).transpose();
    } else {
      row.setZero();
    }
  }
  return index;
}

Eigen::VectorXd EmbeddingIndex::cosine_scores(const EmbeddingVector& query) const {
  if (query.provider_id != provider_id_) {
    throw Error("query embedded by '" + query.provider_id + "' but index built by '" +
                provider_id_ + "'");
  }
  if (rows_.rows() == 0) return Eigen::VectorXd();
  if (query.components.size() != rows_.cols()) throw Error("query dimension mismatch");
  const double n = query.components.norm();
  if (n == 0.0) return Eigen::VectorXd::Zero(rows_.rows());
  return rows_ * (query.components / n);
}

}  // namespace idic
