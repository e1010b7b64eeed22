#pragma once

// Brute-force reference implementations used to check the library. They
// follow the definitions directly and share no code with src/.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "qana/centrality.hpp"
#include "qana/corpus.hpp"
#include "qana/kpg_eval.hpp"
#include "qana/kpm_eval.hpp"
#include "qana/network.hpp"

namespace oracle {

struct DenseGraph {
  std::size_t n = 0;
  Eigen::MatrixXd w;  // symmetric weights, 0 = no edge
  std::vector<std::vector<bool>> edge;
};

inline DenseGraph dense(const qana::QaNetwork& net) {
  DenseGraph g;
  g.n = net.node_count();
  g.w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.n), static_cast<Eigen::Index>(g.n));
  g.edge.assign(g.n, std::vector<bool>(g.n, false));
  for (const auto& e : net.edges()) {
    const auto a = *net.index_of(e.question_id);
    const auto b = *net.index_of(e.argument_id);
    g.w(a, b) = g.w(b, a) = e.weight;
    g.edge[a][b] = g.edge[b][a] = true;
  }
  return g;
}

inline double length(double weight) { return 1.0 - weight + 1e-6; }

inline bool tie(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Solves the PageRank fixed point x = d * M x + (1 - d) / n exactly, with M
// the column-stochastic walk matrix and dangling columns spread uniformly.
inline Eigen::VectorXd pagerank(const qana::QaNetwork& net, double damping) {
  const DenseGraph g = dense(net);
  const auto n = static_cast<Eigen::Index>(g.n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = g.w.col(j).sum();
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = s > 0 ? g.w(i, j) / s : 1.0 / double(n);
  }
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - damping * m;
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(n, (1.0 - damping) / double(n));
  return a.fullPivLu().solve(b);
}

// Enumerates every simple path from each source by DFS, keeps those of
// minimal length (up to the shared tie tolerance) and counts how many pass
// through each node. Normalized over ordered pairs by (n-1)(n-2).
inline std::vector<double> betweenness(const qana::QaNetwork& net) {
  const DenseGraph g = dense(net);
  const std::size_t n = g.n;
  std::vector<double> score(n, 0.0);
  if (n <= 2) return score;
  for (std::size_t s = 0; s < n; ++s) {
    // First pass: shortest simple-path length to every target.
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<bool> on_path(n, false);
    std::function<void(std::size_t, double)> shortest = [&](std::size_t u, double len) {
      if (len < best[u] && !tie(len, best[u])) best[u] = len;
      for (std::size_t v = 0; v < n; ++v) {
        if (!g.edge[u][v] || on_path[v]) continue;
        on_path[v] = true;
        shortest(v, len + length(g.w(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v))));
        on_path[v] = false;
      }
    };
    on_path[s] = true;
    shortest(s, 0.0);
    // Second pass: count shortest paths per target and per interior node.
    std::vector<double> total(n, 0.0);
    std::vector<std::vector<double>> through(n, std::vector<double>(n, 0.0));
    std::vector<std::size_t> stack{s};
    std::function<void(std::size_t, double)> count = [&](std::size_t u, double len) {
      if (u != s && tie(len, best[u])) {
        total[u] += 1.0;
        for (std::size_t k = 1; k + 1 < stack.size(); ++k) through[u][stack[k]] += 1.0;
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (!g.edge[u][v] || on_path[v]) continue;
        on_path[v] = true;
        stack.push_back(v);
        count(v, len + length(g.w(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v))));
        stack.pop_back();
        on_path[v] = false;
      }
    };
    count(s, 0.0);
    on_path[s] = false;
    for (std::size_t t = 0; t < n; ++t) {
      if (t == s || total[t] == 0.0) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (v != s && v != t) score[v] += through[t][v] / total[t];
      }
    }
  }
  for (auto& x : score) x /= double(n - 1) * double(n - 2);
  return score;
}

// Array-based O(n^2) Dijkstra from every node, then the component-corrected
// closeness ((r-1)/(N-1)) * ((r-1)/sum of distances).
inline std::vector<double> closeness(const qana::QaNetwork& net) {
  const DenseGraph g = dense(net);
  const std::size_t n = g.n;
  std::vector<double> score(n, 0.0);
  if (n <= 1) return score;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> dist(n, kInf);
    std::vector<bool> done(n, false);
    dist[s] = 0.0;
    for (std::size_t round = 0; round < n; ++round) {
      std::size_t u = n;
      for (std::size_t v = 0; v < n; ++v) {
        if (!done[v] && dist[v] < kInf && (u == n || dist[v] < dist[u])) u = v;
      }
      if (u == n) break;
      done[u] = true;
      for (std::size_t v = 0; v < n; ++v) {
        if (g.edge[u][v]) {
          dist[v] = std::min(dist[v], dist[u] +
                                          length(g.w(static_cast<Eigen::Index>(u),
                                                     static_cast<Eigen::Index>(v))));
        }
      }
    }
    double sum = 0.0;
    double reach = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (v != s && dist[v] < kInf) {
        sum += dist[v];
        reach += 1.0;
      }
    }
    if (reach > 0.0) score[s] = (reach / double(n - 1)) * (reach / sum);
  }
  return score;
}

// Positionwise strict AP: selection of each argument's best key point by a
// linear scan, ranking by repeated extraction of the maximum, then
// precision@k recounted from scratch at every relevant position.
inline double strict_ap(const std::vector<qana::MatchScore>& pairs, const qana::LabelIndex& labels,
                        double fraction) {
  std::vector<qana::MatchScore> best;
  for (const auto& p : pairs) {
    bool seen = false;
    for (auto& b : best) {
      if (b.arg_id != p.arg_id) continue;
      seen = true;
      if (p.score > b.score || (p.score == b.score && p.kp_id < b.kp_id)) b = p;
    }
    if (!seen) best.push_back(p);
  }
  std::vector<qana::MatchScore> ranking;
  while (!best.empty()) {
    std::size_t top = 0;
    for (std::size_t i = 1; i < best.size(); ++i) {
      const auto& a = best[i];
      const auto& b = best[top];
      const bool better = a.score > b.score ||
                          (a.score == b.score &&
                           (a.arg_id < b.arg_id || (a.arg_id == b.arg_id && a.kp_id < b.kp_id)));
      if (better) top = i;
    }
    ranking.push_back(best[top]);
    best.erase(best.begin() + static_cast<std::ptrdiff_t>(top));
  }
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * double(ranking.size())));
  ranking.resize(std::min(keep, ranking.size()));
  auto relevant = [&](std::size_t i) {
    return labels.get(ranking[i].arg_id, ranking[i].kp_id) == qana::Label::match;
  };
  double sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    if (!relevant(k)) continue;
    ++positives;
    std::size_t hits = 0;
    for (std::size_t i = 0; i <= k; ++i) hits += relevant(i) ? 1 : 0;
    sum += double(hits) / double(k + 1);
  }
  return positives == 0 ? 0.0 : sum / double(positives);
}

// Every candidate cut, each scored by recounting the whole input.
inline double youden_theta(const std::vector<qana::LabeledSimilarity>& pairs) {
  std::vector<double> values;
  for (const auto& p : pairs) values.push_back(p.similarity);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cuts{-kInf};
  for (std::size_t i = 0; i + 1 < values.size(); ++i) cuts.push_back((values[i] + values[i + 1]) / 2);
  cuts.push_back(kInf);
  double best_j = -kInf;
  double best_cut = 0.0;
  for (const double cut : cuts) {
    double tp = 0, fp = 0, pos = 0, neg = 0;
    for (const auto& p : pairs) {
      (p.positive ? pos : neg) += 1;
      if (p.similarity >= cut) (p.positive ? tp : fp) += 1;
    }
    const double j = tp / pos - fp / neg;
    if (j > best_j || (j == best_j && cut > best_cut)) {
      best_j = j;
      best_cut = cut;
    }
  }
  return best_cut;
}

inline double coverage(const std::vector<Eigen::VectorXd>& truth,
                       const std::vector<Eigen::VectorXd>& predicted, double theta) {
  if (truth.empty()) return 0.0;
  double covered = 0.0;
  for (const auto& k : truth) {
    bool hit = false;
    for (const auto& q : predicted) {
      if (k.dot(q) / (k.norm() * q.norm()) >= theta) hit = true;
    }
    covered += hit ? 1.0 : 0.0;
  }
  return covered / double(truth.size());
}

}  // namespace oracle
