#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "idic/http_json.hpp"

namespace idic {

struct EmbeddingVector {
  Eigen::VectorXd components;
  std::string provider_id;
};

// Cosine similarity of two dense vectors; 0 when either has zero norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return a.dot(b) / (na * nb);
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string id() const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;

  EmbeddingVector embed(std::string_view text) const;
};

// Hashed character-trigram term frequencies (FNV-1a into 1024 buckets),
// L2-normalized. Texts shorter than three bytes count as a single gram.
// Needs no model and no network.
class LexicalEmbedding final : public EmbeddingProvider {
 public:
  static constexpr Eigen::Index kDimension = 1024;

  std::string id() const override { return "lexical-trigram-1024"; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

  static Eigen::VectorXd embed_text(std::string_view text);
};

// Speaks POST /embed {"texts": [...]} -> {"embeddings": [[...]], "dim": N}.
class RemoteEmbedding final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedding(HttpEndpoint endpoint, std::size_t batch_size = 64);

  std::string id() const override { return "remote:" + endpoint_.base_url; }

  // Throws TransportError / BackendError, and DecodeError when the reply
  // breaks the protocol (wrong count, ragged or mismatched dimensions).
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  HttpEndpoint endpoint_;
  std::size_t batch_size_;
};

// Row-normalized embedding matrix of a fixed text list, so one
// matrix-vector product yields every cosine score.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;

  static EmbeddingIndex build(const EmbeddingProvider& provider,
                              std::span<const std::string> texts);

  const std::string& provider_id() const noexcept { return provider_id_; }
  Eigen::Index size() const noexcept { return rows_.rows(); }
  const Eigen::MatrixXd& rows() const noexcept { return rows_; }

  // Cosine of `query` against every row. Throws Error when the query comes
  // from a different provider or has a different dimension.
  Eigen::VectorXd cosine_scores(const EmbeddingVector& query) const;

 private:
  std::string provider_id_;
  Eigen::MatrixXd rows_;
};

}  // namespace idic
