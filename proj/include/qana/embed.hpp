#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qana/error.hpp"
#include "qana/http.hpp"

namespace qana {

/// Dense embedding vector tagged with the model that produced it. Values are
/// kept exactly as the backend returned them (no re-normalization).
template <typename Scalar>
struct BasicEmbedding {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector values;
  std::string model;
  bool truncated = false;  // input text was cut to the backend's limit

  Eigen::Index dim() const { return values.size(); }
};

using Embedding = BasicEmbedding<double>;

/// Cosine similarity (a.b)/(|a||b|), clamped to [-1, 1].
/// Throws DimensionMismatch or ZeroNorm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "cosine of vectors with dims " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  const Scalar norms = a.norm() * b.norm();
  if (!(norms > Scalar(0))) throw Error(ErrorCode::zero_norm, "cosine of a zero vector");
  return std::clamp(a.dot(b) / norms, Scalar(-1), Scalar(1));
}

template <typename Scalar>
Scalar cosine(const BasicEmbedding<Scalar>& a, const BasicEmbedding<Scalar>& b) {
  return cosine(a.values, b.values);
}

/// Deterministic offline embedding. Each lowercase alphanumeric token
/// contributes a pseudo-random direction seeded from (seed, token), and the
/// whole text adds a smaller direction of its own, so texts sharing words
/// are similar and distinct texts are almost surely distinct. Unit norm.
Embedding mock_embedding(std::string_view text, int dim, std::uint64_t seed = 0);

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string identifier() const = 0;
  /// Input limit in code points; 0 means unlimited.
  virtual std::size_t max_chars() const { return 0; }
  /// One vector per text, all of the same dimension. Must be safe to call
  /// concurrently.
  virtual std::vector<Eigen::VectorXd> embed_batch(std::span<const std::string> texts) = 0;
};

class MockEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit MockEmbeddingBackend(int dim = 64, std::uint64_t seed = 0, std::size_t max_chars = 0);

  std::string identifier() const override;
  std::size_t max_chars() const override { return max_chars_; }
  std::vector<Eigen::VectorXd> embed_batch(std::span<const std::string> texts) override;

  /// Texts embedded so far (one per input text, summed over batches).
  std::size_t texts_embedded() const { return texts_.load(); }
  std::size_t batch_calls() const { return batches_.load(); }

  /// Makes the vector for `text` carry a NaN component.
  void poison(std::string text);

 private:
  int dim_;
  std::uint64_t seed_;
  std::size_t max_chars_;
  std::vector<std::string> poisoned_;
  std::atomic<std::size_t> texts_{0};
  std::atomic<std::size_t> batches_{0};
};

// The hosted models accept 8191 tokens. A token spans at least one
// character, so this many characters always fits.
inline constexpr std::size_t kHttpEmbeddingMaxChars = 8191;

/// OpenAI-compatible `/embeddings` client. max_chars = 0 selects
/// kHttpEmbeddingMaxChars.
class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(http::Endpoint endpoint, std::string model, std::size_t max_chars = 0);

  std::string identifier() const override { return model_; }
  std::size_t max_chars() const override { return max_chars_; }
  std::vector<Eigen::VectorXd> embed_batch(std::span<const std::string> texts) override;

 private:
  http::Endpoint endpoint_;
  std::string model_;
  std::size_t max_chars_;
};

/// Embedding cache keyed by digest(backend id, text). With a directory it is
/// persisted as `embeddings.bin` (raw little-endian float64, append-only) plus
/// `embeddings.index.jsonl`; reloads are bit-exact. Thread-safe.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  explicit EmbeddingCache(std::filesystem::path dir);

  static std::string key(std::string_view backend_id, std::string_view text);

  std::optional<Embedding> find(const std::string& key) const;
  void insert(const std::string& key, const Embedding& embedding);
  std::size_t size() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, Embedding> entries_;
  std::uint64_t bin_size_ = 0;
};

struct EmbedOptions {
  std::size_t batch_size = 64;
  std::size_t parallelism = 1;
};

/// Embeds `texts` preserving order. Repeated texts and cache hits are not
/// sent to the backend. Texts longer than the backend limit are truncated
/// and flagged. Throws BackendError (subject = batch index) on transport
/// failure or on a vector that is non-finite, zero, or of the wrong dim.
std::vector<Embedding> embed_texts(std::span<const std::string> texts, EmbeddingBackend& backend,
                                   EmbeddingCache* cache, const EmbedOptions& options = {});

/// Embeddings addressed by node id (question, argument or key point id).
class EmbeddingTable {
 public:
  void insert(std::string id, Embedding embedding);
  bool contains(std::string_view id) const;
  /// Throws MissingEmbedding.
  const Embedding& at(std::string_view id) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Embedding, std::less<>> entries_;
};

/// Checks the vector invariants: finite components and positive norm.
bool is_valid_embedding(const Eigen::VectorXd& values);

}  // namespace qana
