#include <doctest.h>

#include <limits>

#include "qana/embed.hpp"
#include "qana/error.hpp"
#include "support.hpp"

using namespace qana;
using testing::TempDir;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::config_error;
}

// Returns fixed vectors regardless of input.
class ScriptedBackend : public EmbeddingBackend {
 public:
  explicit ScriptedBackend(std::vector<Eigen::VectorXd> out) : out_(std::move(out)) {}
  std::string identifier() const override { return "scripted"; }
  std::vector<Eigen::VectorXd> embed_batch(std::span<const std::string> texts) override {
    std::vector<Eigen::VectorXd> batch;
    for (std::size_t i = 0; i < texts.size(); ++i) batch.push_back(out_[next_++ % out_.size()]);
    return batch;
  }

 private:
  std::vector<Eigen::VectorXd> out_;
  std::size_t next_ = 0;
};

}  // namespace

TEST_CASE("embed: cosine examples") {
  CHECK(cosine(vec({1, 0}), vec({1, 0})) == doctest::Approx(1.0));
  CHECK(cosine(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0));
  CHECK(cosine(vec({1, 2, 2}), vec({2, 1, 2})) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(cosine(vec({1, 0}), vec({-1, 0})) == doctest::Approx(-1.0));
}

TEST_CASE("embed: cosine errors") {
  CHECK(code_of([] { cosine(vec({1, 0}), vec({1, 0, 0})); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([] { cosine(vec({0, 0}), vec({1, 0})); }) == ErrorCode::zero_norm);
}

TEST_CASE("embed: cosine works for single precision") {
  BasicEmbedding<float> a{Eigen::Vector3f(1, 2, 2), "f", false};
  BasicEmbedding<float> b{Eigen::Vector3f(2, 1, 2), "f", false};
  CHECK(cosine(a, b) == doctest::Approx(8.0f / 9.0f));
}

TEST_CASE("embed: mock embedding is deterministic and unit norm") {
  const Embedding a = mock_embedding("x", 8);
  const Embedding b = mock_embedding("x", 8);
  CHECK(a.values == b.values);
  CHECK(a.values.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(a, b) == doctest::Approx(1.0));
  CHECK(mock_embedding("y", 8).values != a.values);
  CHECK(mock_embedding("x", 8, 1).values != a.values);
  CHECK(code_of([] { mock_embedding("x", 1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("embed: mock texts sharing words are closer") {
  const auto base = mock_embedding("vaccines protect children", 64);
  const auto near = mock_embedding("vaccines protect infants", 64);
  const auto far = mock_embedding("regulate social media", 64);
  CHECK(cosine(base, near) > cosine(base, far));
}

TEST_CASE("embed: embed_texts preserves order and repeats") {
  MockEmbeddingBackend backend(16);
  const std::vector<std::string> texts{"a", "b", "a"};
  const auto out = embed_texts(texts, backend, nullptr);
  REQUIRE(out.size() == 3);
  CHECK(out[0].values == out[2].values);
  CHECK(out[0].values != out[1].values);
  CHECK(backend.texts_embedded() == 2);
  CHECK(out[0].model == backend.identifier());
}

TEST_CASE("embed: warm cache makes no backend calls") {
  TempDir dir;
  const std::vector<std::string> texts{"one", "two", "three"};
  std::vector<Embedding> first;
  {
    MockEmbeddingBackend backend(16);
    EmbeddingCache cache(dir / "cache");
    first = embed_texts(texts, backend, &cache, {2, 1});
    CHECK(backend.batch_calls() == 2);
  }
  MockEmbeddingBackend backend(16);
  EmbeddingCache reloaded(dir / "cache");
  CHECK(reloaded.size() == 3);
  const auto second = embed_texts(texts, backend, &reloaded);
  CHECK(backend.texts_embedded() == 0);
  for (std::size_t i = 0; i < texts.size(); ++i) CHECK(second[i].values == first[i].values);
}

TEST_CASE("embed: invalid vectors raise BackendError with the batch index") {
  MockEmbeddingBackend backend(8);
  backend.poison("bad");
  const std::vector<std::string> texts{"ok", "fine", "bad"};
  try {
    embed_texts(texts, backend, nullptr, {2, 1});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.subject() == "batch 1");
  }
  ScriptedBackend zero({Eigen::VectorXd::Zero(4)});
  const std::vector<std::string> one{"z"};
  CHECK_THROWS_AS(embed_texts(one, zero, nullptr), BackendError);
  ScriptedBackend ragged({vec({1, 0}), vec({1, 0, 0})});
  const std::vector<std::string> two{"p", "q"};
  CHECK_THROWS_AS(embed_texts(two, ragged, nullptr, {1, 1}), BackendError);
}

TEST_CASE("embed: long texts are truncated and flagged") {
  MockEmbeddingBackend backend(8, 0, 5);
  const std::vector<std::string> texts{"short", "much longer text"};
  const auto out = embed_texts(texts, backend, nullptr);
  CHECK_FALSE(out[0].truncated);
  CHECK(out[1].truncated);
  CHECK(out[1].values == mock_embedding("much ", 8).values);
}

TEST_CASE("embed: table lookups") {
  EmbeddingTable table;
  table.insert("a", mock_embedding("a", 4));
  CHECK(table.contains("a"));
  CHECK(code_of([&] { table.at("b"); }) == ErrorCode::missing_embedding);
}

TEST_CASE("embed: validity predicate") {
  CHECK(is_valid_embedding(vec({0.5, 0})));
  CHECK_FALSE(is_valid_embedding(vec({0, 0})));
  CHECK_FALSE(is_valid_embedding(vec({std::numeric_limits<double>::infinity(), 0})));
  CHECK_FALSE(is_valid_embedding(Eigen::VectorXd()));
}
