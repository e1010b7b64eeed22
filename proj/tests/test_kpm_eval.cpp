#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qana/error.hpp"
#include "qana/kpm_eval.hpp"
#include "support.hpp"

using namespace qana;
using testing::embedding;

namespace {

// Unit vectors at the given cosines to e0 = (1, 0).
Eigen::VectorXd at_cosine(double c) { return Eigen::Vector2d(c, std::sqrt(1.0 - c * c)); }

Question question(std::string id, std::string arg) {
  return {std::move(id), std::move(arg), GenerationStyle::closed, "text", "m"};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::config_error;
}

}  // namespace

TEST_CASE("kpm: aggregate of {0.8, 0.6} is 0.7") {
  const Argument arg{"a", "t", Stance::pro, "A"};
  const KeyPoint kp{"k", "t", Stance::pro, "K"};
  EmbeddingTable table;
  table.insert("k", embedding(Eigen::Vector2d(1.0, 0.0)));
  table.insert("q1", embedding(at_cosine(0.8)));
  table.insert("q2", embedding(at_cosine(0.6)));
  const std::vector<Question> qs{question("q1", "a"), question("q2", "a")};
  const MatchScore m = aggregate_match(arg, kp, qs, table);
  CHECK(m.arg_id == "a");
  CHECK(m.kp_id == "k");
  CHECK(m.score == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("kpm: singleton aggregate is the single similarity") {
  const Argument arg{"a", "t", Stance::pro, "A"};
  const KeyPoint kp{"k", "t", Stance::pro, "K"};
  EmbeddingTable table;
  table.insert("k", embedding(Eigen::Vector2d(1.0, 0.0)));
  table.insert("q", embedding(at_cosine(0.35)));
  const std::vector<Question> qs{question("q", "a")};
  CHECK(aggregate_match(arg, kp, qs, table).score == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("kpm: mock-embedded aggregate equals the explicit mean") {
  const Argument arg{"a", "t", Stance::pro, "Schools should ban phones"};
  const KeyPoint kp{"k", "t", Stance::pro, "Phones distract students"};
  const std::vector<std::string> texts{"Do phones distract students?", "Are bans enforceable?",
                                       "Should schools decide?"};
  EmbeddingTable table;
  table.insert("k", mock_embedding(kp.text, 64, 3));
  std::vector<Question> qs;
  double sum = 0.0;
  const Eigen::VectorXd kv = mock_embedding(kp.text, 64, 3).values;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const std::string id = "q" + std::to_string(i);
    const Embedding e = mock_embedding(texts[i], 64, 3);
    sum += e.values.dot(kv) / (e.values.norm() * kv.norm());
    table.insert(id, e);
    qs.push_back(question(id, "a"));
  }
  CHECK(aggregate_match(arg, kp, qs, table).score == doctest::Approx(sum / 3.0).epsilon(1e-12));
}

TEST_CASE("kpm: aggregate errors") {
  const Argument arg{"a", "t", Stance::pro, "A"};
  const KeyPoint kp{"k", "t", Stance::pro, "K"};
  EmbeddingTable table;
  table.insert("k", embedding(Eigen::Vector2d(1.0, 0.0)));
  CHECK(code_of([&] { aggregate_match(arg, kp, {}, table); }) == ErrorCode::empty_question_set);
  const std::vector<Question> missing{question("nope", "a")};
  CHECK(code_of([&] { aggregate_match(arg, kp, missing, table); }) ==
        ErrorCode::missing_embedding);
}

TEST_CASE("kpm: strict AP of an all-match ranking is 1") {
  LabelIndex labels;
  std::vector<MatchScore> pairs;
  for (int i = 0; i < 6; ++i) {
    const std::string a = "a" + std::to_string(i);
    labels.insert(a, "k", Label::match);
    pairs.push_back({a, "k", 1.0 - 0.1 * i});
  }
  CHECK(strict_average_precision(pairs, labels) == 1.0);
}

TEST_CASE("kpm: strict AP of [match, no_match] is 1") {
  LabelIndex labels;
  labels.insert("a1", "k", Label::match);
  labels.insert("a2", "k", Label::no_match);
  labels.insert("a3", "k", Label::no_match);
  labels.insert("a4", "k", Label::match);
  // Top half keeps a1 (match) then a2 (no_match).
  const std::vector<MatchScore> pairs{
      {"a1", "k", 0.9}, {"a2", "k", 0.8}, {"a3", "k", 0.7}, {"a4", "k", 0.6}};
  CHECK(strict_average_precision(pairs, labels) == 1.0);
}

TEST_CASE("kpm: strict AP keeps one key point per argument and counts gaps as negatives") {
  LabelIndex labels;
  labels.insert("a1", "k1", Label::no_match);
  labels.insert("a1", "k2", Label::match);
  labels.insert("a2", "k1", Label::undecided);
  const std::vector<MatchScore> pairs{{"a1", "k1", 0.9}, {"a1", "k2", 0.5}, {"a2", "k1", 0.95},
                                      {"a2", "k2", 0.1}, {"a3", "k1", 0.2}};
  // Best pairs: a2/k1 (undecided), a1/k1 (no_match), a3/k1 (unannotated).
  CHECK(strict_average_precision(pairs, labels, 1.0) == 0.0);
}

TEST_CASE("kpm: strict AP on random 8-argument slices equals the positionwise oracle") {
  testing::Rng rng(11);
  for (int round = 0; round < 200; ++round) {
    LabelIndex labels;
    std::vector<MatchScore> pairs;
    for (int a = 0; a < 8; ++a) {
      for (int k = 0; k < 3; ++k) {
        const std::string aid = "a" + std::to_string(a);
        const std::string kid = "k" + std::to_string(k);
        const auto roll = rng() % 4;
        if (roll < 3) labels.insert(aid, kid, static_cast<Label>(roll));
        // Coarse scores so that ties are common.
        pairs.push_back({aid, kid, 0.1 * static_cast<double>(testing::pick(rng, 0, 6))});
      }
    }
    for (const double fraction : {0.5, 0.25, 1.0}) {
      CHECK(strict_average_precision(pairs, labels, fraction) ==
            oracle::strict_ap(pairs, labels, fraction));
    }
  }
}

TEST_CASE("kpm: truncation fraction outside (0, 1] is rejected") {
  LabelIndex labels;
  const std::vector<MatchScore> pairs{{"a", "k", 0.5}};
  CHECK(code_of([&] { strict_average_precision(pairs, labels, 0.0); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([&] { strict_average_precision(pairs, labels, 1.5); }) ==
        ErrorCode::invalid_argument);
}

namespace {

// One topic, two stances, two arguments and one key point each. The pro
// slice has its match at the top (AP 1); the con slice has its match second
// of the kept pairs (AP 1/2).
struct TwoSlices {
  Corpus corpus;
  std::vector<Question> questions;
  EmbeddingTable table;

  TwoSlices() {
    corpus = Corpus({{"t", "T"}},
                    {{"ap1", "t", Stance::pro, "P1"},
                     {"ap2", "t", Stance::pro, "P2"},
                     {"ac1", "t", Stance::con, "C1"},
                     {"ac2", "t", Stance::con, "C2"}},
                    {{"kp", "t", Stance::pro, "KP"}, {"kc", "t", Stance::con, "KC"}},
                    {{"ap1", "kp", Label::match},
                     {"ap2", "kp", Label::no_match},
                     {"ac1", "kc", Label::no_match},
                     {"ac2", "kc", Label::match}});
    table.insert("kp", embedding(Eigen::Vector2d(1.0, 0.0)));
    table.insert("kc", embedding(Eigen::Vector2d(1.0, 0.0)));
    const std::vector<std::pair<std::string, double>> sims{
        {"ap1", 0.9}, {"ap2", 0.5}, {"ac1", 0.9}, {"ac2", 0.5}};
    for (const auto& [arg, c] : sims) {
      questions.push_back(question("q_" + arg, arg));
      table.insert("q_" + arg, embedding(at_cosine(c)));
    }
  }
};

}  // namespace

TEST_CASE("kpm: overall mAP is the unweighted mean of slice APs") {
  TwoSlices f;
  const KpmReport r = evaluate_kpm(f.corpus, f.questions, f.table, {1.0});
  REQUIRE(r.per_slice.size() == 2);
  CHECK(r.per_slice[0].slice == SliceKey{"t", Stance::pro});
  CHECK(r.per_slice[0].ap == 1.0);
  CHECK(r.per_slice[1].ap == 0.5);
  CHECK(r.per_slice[1].n_args == 2);
  CHECK(r.per_slice[1].n_kps == 1);
  CHECK(r.overall_map == 0.75);
  CHECK(r.excluded.empty());
  CHECK(r.fallback_args.empty());
}

TEST_CASE("kpm: slices without positives are excluded") {
  TwoSlices f;
  Corpus no_con_match({{"t", "T"}}, f.corpus.arguments(), f.corpus.key_points(),
                      {{"ap1", "kp", Label::match}, {"ac2", "kc", Label::undecided}});
  const KpmReport r = evaluate_kpm(no_con_match, f.questions, f.table, {1.0});
  REQUIRE(r.per_slice.size() == 1);
  REQUIRE(r.excluded.size() == 1);
  CHECK(r.excluded[0] == SliceKey{"t", Stance::con});
  CHECK(r.overall_map == 1.0);
}

TEST_CASE("kpm: arguments without questions fall back to their own embedding") {
  TwoSlices f;
  std::vector<Question> partial(f.questions.begin() + 1, f.questions.end());
  f.table.insert("ap1", embedding(at_cosine(0.9)));
  const KpmReport r = evaluate_kpm(f.corpus, partial, f.table, {1.0});
  CHECK(r.fallback_args == std::vector<std::string>{"ap1"});
  CHECK(r.per_slice[0].ap == 1.0);
}

TEST_CASE("kpm: missing embeddings propagate with the id") {
  TwoSlices f;
  EmbeddingTable sparse;
  sparse.insert("kp", embedding(Eigen::Vector2d(1.0, 0.0)));
  try {
    evaluate_kpm(f.corpus, f.questions, sparse);
    FAIL("expected MissingEmbedding");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_embedding);
    CHECK(std::string(e.what()).find("q_ap1") != std::string::npos);
  }
}

TEST_CASE("kpm: backend overload embeds each question and key point exactly once") {
  testing::Rng rng(5);
  const Corpus corpus = testing::random_corpus(rng, 6, 3);
  std::vector<Question> qs;
  for (const auto& a : corpus.arguments()) {
    for (int i = 0; i < 2; ++i) {
      qs.push_back({a.id + "_q" + std::to_string(i), a.id, GenerationStyle::open,
                    "question " + std::to_string(i) + " about " + a.text, "m"});
    }
  }
  MockEmbeddingBackend backend(32, 1);
  const KpmReport r = evaluate_kpm(corpus, qs, backend, nullptr);
  CHECK(backend.texts_embedded() == qs.size() + corpus.key_points().size());
  CHECK(r.overall_map >= 0.0);
  CHECK(r.overall_map <= 1.0);

  // Same numbers as the table-based overload.
  EmbeddingTable table;
  for (const auto& q : qs) table.insert(q.id, mock_embedding(q.text, 32, 1));
  for (const auto& k : corpus.key_points()) table.insert(k.id, mock_embedding(k.text, 32, 1));
  const KpmReport direct = evaluate_kpm(corpus, qs, table);
  CHECK(direct.overall_map == r.overall_map);
}
