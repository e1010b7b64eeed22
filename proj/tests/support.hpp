#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qana/corpus.hpp"
#include "qana/embed.hpp"
#include "qana/network.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(QANA_FIXTURE_DIR) / name; }

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("qana-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Random bipartite network with at most `max_nodes` nodes. Weights are either
// continuous or drawn from a coarse grid so that equal-length paths occur.
inline qana::QaNetwork random_network(Rng& rng, std::size_t max_nodes = 12) {
  const std::size_t nq = pick(rng, 1, max_nodes - 1);
  const std::size_t na = pick(rng, 1, max_nodes - nq);
  std::vector<std::string> qs, as;
  for (std::size_t i = 0; i < nq; ++i) qs.push_back("q" + std::to_string(i));
  for (std::size_t i = 0; i < na; ++i) as.push_back("d" + std::to_string(i));
  const double density = uniform(rng, 0.2, 1.0);
  const bool grid = rng() % 2 == 0;
  std::vector<qana::QaEdge> edges;
  for (const auto& q : qs) {
    for (const auto& a : as) {
      if (uniform(rng, 0, 1) > density) continue;
      const double w = grid ? 0.25 * static_cast<double>(pick(rng, 1, 4)) : uniform(rng, 0.01, 1.0);
      edges.push_back({q, a, w});
    }
  }
  return qana::QaNetwork(qs, as, edges);
}

inline Eigen::VectorXd random_vector(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = uniform(rng, -1.0, 1.0);
  if (v.norm() == 0.0) v[0] = 1.0;
  return v;
}

inline qana::Embedding embedding(Eigen::VectorXd v, std::string model = "test") {
  qana::Embedding e;
  e.values = std::move(v);
  e.model = std::move(model);
  return e;
}

// Corpus with one topic, both stances, the given number of arguments and
// key points per stance, and random labels (some pairs left unannotated).
inline qana::Corpus random_corpus(Rng& rng, std::size_t args_per_stance,
                                  std::size_t kps_per_stance) {
  std::vector<qana::Topic> topics{{"t", "Topic statement"}};
  std::vector<qana::Argument> args;
  std::vector<qana::KeyPoint> kps;
  std::vector<qana::MatchAnnotation> labels;
  for (auto stance : {qana::Stance::pro, qana::Stance::con}) {
    const std::string tag = stance == qana::Stance::pro ? "p" : "c";
    for (std::size_t k = 0; k < kps_per_stance; ++k) {
      kps.push_back({"k" + tag + std::to_string(k), "t", stance,
                     "key point " + tag + " " + std::to_string(k)});
    }
    for (std::size_t a = 0; a < args_per_stance; ++a) {
      const std::string id = "a" + tag + std::to_string(a);
      args.push_back({id, "t", stance, "argument " + tag + " number " + std::to_string(a)});
      for (std::size_t k = 0; k < kps_per_stance; ++k) {
        const auto roll = rng() % 10;
        if (roll < 2) continue;
        labels.push_back({id, "k" + tag + std::to_string(k),
                          roll < 5 ? qana::Label::match
                                   : (roll < 9 ? qana::Label::no_match : qana::Label::undecided)});
      }
    }
  }
  return qana::Corpus(topics, args, kps, labels);
}

}  // namespace testing
