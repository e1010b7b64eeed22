#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "oracles.hpp"
#include "qana/error.hpp"
#include "qana/kpg_eval.hpp"
#include "qana/qgen.hpp"
#include "support.hpp"

using namespace qana;
using testing::embedding;

namespace {

Eigen::VectorXd at_cosine(double c) { return Eigen::Vector2d(c, std::sqrt(1.0 - c * c)); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::config_error;
}

std::vector<LabeledSimilarity> labeled(std::initializer_list<double> pos,
                                       std::initializer_list<double> neg) {
  std::vector<LabeledSimilarity> out;
  for (const double s : pos) out.push_back({s, true});
  for (const double s : neg) out.push_back({s, false});
  return out;
}

}  // namespace

TEST_CASE("kpg: separated labels pick the middle cut with J = 1") {
  const auto pairs = labeled({0.9, 0.8}, {0.2, 0.1});
  const Threshold t = select_threshold(pairs, ThresholdRule::youden, "emb");
  CHECK(t.theta == doctest::Approx(0.5));
  CHECK(t.tpr == 1.0);
  CHECK(t.fpr == 0.0);
  CHECK(t.source == "emb");
  CHECK(t.theta == oracle::youden_theta(pairs));
}

TEST_CASE("kpg: interleaved labels give J below 1 and match the brute-force scan") {
  const auto pairs = labeled({0.8, 0.6, 0.4, 0.2}, {0.7, 0.5, 0.3, 0.1});
  const Threshold t = select_threshold(pairs);
  CHECK(t.tpr - t.fpr < 1.0);
  CHECK(t.theta == oracle::youden_theta(pairs));
}

TEST_CASE("kpg: separable input gets TPR 1 and FPR 0") {
  const auto pairs = labeled({0.95, 0.7, 0.66}, {0.65, 0.3, -0.2, 0.1});
  const Threshold t = select_threshold(pairs);
  CHECK(t.tpr == 1.0);
  CHECK(t.fpr == 0.0);
  CHECK(t.theta > 0.65);
  CHECK(t.theta <= 0.66);
}

TEST_CASE("kpg: threshold ties resolve to the larger cut") {
  // Cuts 0.45 and 0.75 both reach J = 1/2.
  const auto pairs = labeled({0.8, 0.4}, {0.5, 0.1});
  const Threshold t = select_threshold(pairs);
  CHECK(t.theta == doctest::Approx(0.65));
  CHECK(t.tpr - t.fpr == doctest::Approx(0.5));
  CHECK(t.theta == oracle::youden_theta(pairs));
}

TEST_CASE("kpg: inverted labels select +inf") {
  const auto pairs = labeled({0.1}, {0.9});
  const Threshold t = select_threshold(pairs);
  CHECK(t.theta == std::numeric_limits<double>::infinity());
  CHECK(t.tpr == 0.0);
  CHECK(t.fpr == 0.0);
}

TEST_CASE("kpg: single-class input is degenerate") {
  CHECK(code_of([] { select_threshold(labeled({0.3, 0.4}, {})); }) ==
        ErrorCode::degenerate_labels);
  CHECK(code_of([] { select_threshold(labeled({}, {0.3})); }) == ErrorCode::degenerate_labels);
  CHECK(code_of([] { select_threshold({}); }) == ErrorCode::degenerate_labels);
}

TEST_CASE("kpg: closest-to-corner rule can differ from Youden") {
  std::vector<LabeledSimilarity> pairs;
  for (int i = 0; i < 10; ++i) pairs.push_back({0.5 + 0.04 * i, true});
  for (int i = 0; i < 10; ++i) pairs.push_back({0.1 + 0.06 * i, false});
  const Threshold y = select_threshold(pairs, ThresholdRule::youden);
  const Threshold c = select_threshold(pairs, ThresholdRule::closest_to_corner);
  const double dy = std::hypot(y.fpr, 1.0 - y.tpr);
  const double dc = std::hypot(c.fpr, 1.0 - c.tpr);
  CHECK(dc <= dy);
  CHECK(c.tpr - c.fpr <= y.tpr - y.fpr);
}

TEST_CASE("kpg: threshold pairs skip undecided annotations") {
  Corpus corpus({{"t", "T"}},
                {{"a1", "t", Stance::pro, "A1"}, {"a2", "t", Stance::pro, "A2"}},
                {{"k", "t", Stance::pro, "K"}},
                {{"a1", "k", Label::match}, {"a2", "k", Label::undecided}});
  EmbeddingTable table;
  table.insert("k", embedding(Eigen::Vector2d(1.0, 0.0)));
  table.insert("a1", embedding(at_cosine(0.4)));
  table.insert("a2", embedding(at_cosine(0.2)));
  const auto pairs = threshold_pairs(corpus, table);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].positive);
  CHECK(pairs[0].similarity == doctest::Approx(0.4));
}

namespace {

// qA and qB nearly identical, qC far from both.
struct DedupFixture {
  EmbeddingTable table;
  std::vector<std::string> ranked{"qA", "qB", "qC"};
  DedupFixture() {
    table.insert("qA", embedding(Eigen::Vector2d(1.0, 0.0)));
    table.insert("qB", embedding(at_cosine(0.95)));
    table.insert("qC", embedding(at_cosine(0.3)));
  }
};

}  // namespace

TEST_CASE("kpg: dedup drops a near-duplicate") {
  DedupFixture f;
  CHECK(dedup_top_n(f.ranked, f.table, 0.8, 2) == std::vector<std::string>{"qA", "qC"});
}

TEST_CASE("kpg: dedup is a no-op when every pair is below theta") {
  DedupFixture f;
  CHECK(dedup_top_n(f.ranked, f.table, 0.99, 3) == f.ranked);
  CHECK(dedup_top_n(f.ranked, f.table, 0.99, 2) == std::vector<std::string>{"qA", "qB"});
}

TEST_CASE("kpg: dedup with n = 1 returns the first question") {
  DedupFixture f;
  CHECK(dedup_top_n(f.ranked, f.table, -1.0, 1) == std::vector<std::string>{"qA"});
  CHECK(dedup_top_n(f.ranked, f.table, 0.5, 1) == std::vector<std::string>{"qA"});
}

TEST_CASE("kpg: coverage of 3 out of 4 key points is 0.75") {
  EmbeddingTable table;
  std::vector<KeyPoint> truth;
  const Eigen::Vector3d axes[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 0}};
  for (int i = 0; i < 4; ++i) {
    const std::string id = "k" + std::to_string(i);
    truth.push_back({id, "t", Stance::pro, id});
    table.insert(id, embedding(axes[i]));
  }
  table.insert("q0", embedding(Eigen::Vector3d(1, 0.05, 0)));
  table.insert("q1", embedding(Eigen::Vector3d(0, 1, 0.05)));
  table.insert("q2", embedding(Eigen::Vector3d(0.05, 0, 1)));
  const std::vector<std::string> pred{"q0", "q1", "q2"};
  CHECK(coverage_at_n(truth, pred, table, 0.9) == 0.75);
}

TEST_CASE("kpg: coverage with no predictions is 0") {
  EmbeddingTable table;
  table.insert("k", embedding(Eigen::Vector2d(1.0, 0.0)));
  const std::vector<KeyPoint> truth{{"k", "t", Stance::pro, "K"}};
  CHECK(coverage_at_n(truth, {}, table, -1.0) == 0.0);
}

TEST_CASE("kpg: coverage without truth is an error") {
  EmbeddingTable table;
  CHECK(code_of([&] { coverage_at_n({}, {}, table, 0.5); }) == ErrorCode::empty_truth);
}

TEST_CASE("kpg: coverage on random mock embeddings equals the double loop") {
  testing::Rng rng(21);
  for (int round = 0; round < 50; ++round) {
    EmbeddingTable table;
    std::vector<KeyPoint> truth;
    std::vector<Eigen::VectorXd> tv, pv;
    std::vector<std::string> pred;
    const auto nk = testing::pick(rng, 1, 6);
    const auto nq = testing::pick(rng, 0, 8);
    for (std::size_t i = 0; i < nk; ++i) {
      const std::string id = "k" + std::to_string(i);
      const Embedding e = mock_embedding("key " + std::to_string(rng() % 7), 16, round);
      truth.push_back({id, "t", Stance::pro, id});
      tv.push_back(e.values);
      table.insert(id, e);
    }
    for (std::size_t i = 0; i < nq; ++i) {
      const std::string id = "q" + std::to_string(i);
      const Embedding e = mock_embedding("key " + std::to_string(rng() % 7) + " q", 16, round);
      pred.push_back(id);
      pv.push_back(e.values);
      table.insert(id, e);
    }
    const double theta = testing::uniform(rng, -0.2, 0.9);
    CHECK(coverage_at_n(truth, pred, table, theta) == oracle::coverage(tv, pv, theta));
  }
}

namespace {

struct MiniSlices {
  Corpus corpus;
  std::vector<Question> questions;
  EmbeddingTable table;
  std::vector<SliceNetwork> networks;
  Threshold threshold;

  MiniSlices() {
    corpus = load_corpus(testing::fixture("mini"), CorpusFormat::argkp_csv);
    MockGenerationBackend gen(
        MockGenerationBackend::read_fixture(testing::fixture("mini_generations.jsonl")));
    questions = generate_corpus_questions(corpus, GenerationStyle::closed, gen,
                                          default_template(GenerationStyle::closed), nullptr)
                    .questions;
    for (const auto& q : questions) table.insert(q.id, mock_embedding(q.text, 64));
    for (const auto& a : corpus.arguments()) table.insert(a.id, mock_embedding(a.text, 64));
    for (const auto& k : corpus.key_points()) table.insert(k.id, mock_embedding(k.text, 64));
    for (const auto& key : corpus.slice_keys()) {
      const Corpus part = slice(corpus, key.topic_id, key.stance);
      std::vector<Question> qs;
      for (const auto& q : questions) {
        if (part.find_argument(q.source_arg_id) != nullptr) qs.push_back(q);
      }
      networks.push_back({key, build_network(qs, part.arguments(), table,
                                             SparsificationPolicy::top_k(10))});
    }
    threshold = select_threshold(threshold_pairs(corpus, table));
  }
};

}  // namespace

TEST_CASE("kpg: mini fixture curves are deterministic and monotone") {
  MiniSlices f;
  REQUIRE(f.networks.size() == 4);
  for (const auto kind : {CentralityKind::pagerank, CentralityKind::degree,
                          CentralityKind::betweenness, CentralityKind::closeness}) {
    CAPTURE(to_string(kind));
    const CentralityMeasure m{kind};
    const KpgReport a = evaluate_kpg(f.corpus, f.networks, m, f.table, f.threshold, 10);
    const KpgReport b = evaluate_kpg(f.corpus, f.networks, m, f.table, f.threshold, 10, {}, 4);
    CHECK(a.curve == b.curve);
    REQUIRE(a.curve.size() == 10);
    REQUIRE(a.per_slice.size() == 4);
    for (std::size_t n = 1; n < a.curve.size(); ++n) CHECK(a.curve[n - 1] <= a.curve[n]);
    for (const double c : a.curve) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
    for (const auto& s : a.per_slice) {
      CHECK(s.predicted.size() <= 10);
      for (std::size_t n = 1; n < s.coverage.size(); ++n) {
        CHECK(s.coverage[n - 1] <= s.coverage[n]);
      }
    }
  }
}

TEST_CASE("kpg: n_max = 1 is the coverage of the best deduplicated question") {
  MiniSlices f;
  const CentralityMeasure m{CentralityKind::pagerank};
  const KpgReport r = evaluate_kpg(f.corpus, f.networks, m, f.table, f.threshold, 1);
  REQUIRE(r.curve.size() == 1);
  double sum = 0.0;
  for (const auto& sn : f.networks) {
    const auto ranked = top_n_questions(compute_centrality(sn.network, m), sn.network, 1);
    const Corpus part = slice(f.corpus, sn.slice.topic_id, sn.slice.stance);
    sum += coverage_at_n(part.key_points(), ranked, f.table, f.threshold.theta);
  }
  CHECK(r.curve[0] == doctest::Approx(sum / 4.0).epsilon(1e-15));
  CHECK(code_of([&] { evaluate_kpg(f.corpus, f.networks, m, f.table, f.threshold, 0); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("kpg: slices without questions are excluded") {
  MiniSlices f;
  std::vector<SliceNetwork> nets = f.networks;
  nets[1].network = QaNetwork({}, {"x"}, {});
  const KpgReport r = evaluate_kpg(f.corpus, nets, CentralityMeasure{CentralityKind::degree},
                                   f.table, f.threshold, 3);
  CHECK(r.per_slice.size() == 3);
  REQUIRE(r.excluded.size() == 1);
  CHECK(r.excluded[0] == f.networks[1].slice);
}

TEST_CASE("kpg: on the bundled top-5 table, PageRank covers at least as much as betweenness") {
  std::ifstream in(testing::fixture("social_media_con_top5.json"));
  const auto doc = nlohmann::json::parse(in);
  EmbeddingTable table;
  std::vector<KeyPoint> truth;
  int i = 0;
  for (const auto& text : doc.at("key_points")) {
    const std::string id = "k" + std::to_string(i++);
    truth.push_back({id, "topic", Stance::con, text.get<std::string>()});
    table.insert(id, mock_embedding(text.get<std::string>(), 256));
  }
  auto coverage_of = [&](const std::string& measure, double theta) {
    std::vector<std::string> ids;
    int j = 0;
    for (const auto& text : doc.at("top5").at(measure)) {
      const std::string id = measure + std::to_string(j++);
      table.insert(id, mock_embedding(text.get<std::string>(), 256));
      ids.push_back(id);
    }
    return coverage_at_n(truth, ids, table, theta);
  };
  for (const double theta : {0.2, 0.3, 0.4}) {
    CAPTURE(theta);
    const double pr = coverage_of("pagerank", theta);
    CHECK(pr >= coverage_of("betweenness", theta));
    CHECK(pr >= coverage_of("closeness", theta));
    CHECK(pr == coverage_of("degree", theta));
  }
  // At 0.2 every list covers everything; the lists separate from 0.3 up.
  CHECK(coverage_of("betweenness", 0.2) == 1.0);
  CHECK(coverage_of("pagerank", 0.3) > coverage_of("betweenness", 0.3));
  CHECK(coverage_of("pagerank", 0.4) > coverage_of("closeness", 0.4));
}
