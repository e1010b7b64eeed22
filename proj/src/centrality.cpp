#include "qana/centrality.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

#include "qana/error.hpp"
#include "qana/parallel.hpp"

namespace qana {

std::string_view to_string(CentralityKind kind) {
  switch (kind) {
    case CentralityKind::pagerank: return "pagerank";
    case CentralityKind::degree: return "degree";
    case CentralityKind::betweenness: return "betweenness";
    case CentralityKind::closeness: return "closeness";
  }
  return "invalid";
}

std::optional<CentralityKind> parse_centrality(std::string_view name) {
  for (auto k : {CentralityKind::pagerank, CentralityKind::degree, CentralityKind::betweenness,
                 CentralityKind::closeness}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

void CentralityMeasure::validate() const {
  if (kind != CentralityKind::pagerank) return;
  if (!(pagerank.damping > 0.0 && pagerank.damping < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "pagerank damping must lie in (0, 1)");
  }
  if (!(pagerank.tolerance > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "pagerank tolerance must be positive");
  }
  if (pagerank.max_iters < 1) {
    throw Error(ErrorCode::invalid_argument, "pagerank max_iters must be positive");
  }
}

double CentralityScores::at(std::string_view node_id) const {
  const auto it = std::find(node_ids.begin(), node_ids.end(), node_id);
  if (it == node_ids.end()) {
    throw Error(ErrorCode::unknown_node, "unknown node '" + std::string(node_id) + "'");
  }
  return values[it - node_ids.begin()];
}

namespace {

CentralityScores blank_scores(const QaNetwork& net, CentralityKind kind) {
  CentralityScores s;
  s.measure.kind = kind;
  s.node_ids.reserve(net.node_count());
  for (std::size_t i = 0; i < net.node_count(); ++i) s.node_ids.push_back(net.node_id(i));
  s.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.node_count()));
  return s;
}

bool same_length(double a, double b) {
  return std::abs(a - b) <= kPathTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

// Single-source shortest paths under path_length(). `order` receives nodes in
// non-decreasing distance; `sigma` counts shortest paths; `preds` lists the
// predecessors on shortest paths.
struct ShortestPaths {
  std::vector<double> dist;
  std::vector<double> sigma;
  std::vector<std::vector<std::size_t>> preds;
  std::vector<std::size_t> order;
};

void dijkstra(const QaNetwork& net, std::size_t source, ShortestPaths& sp) {
  const std::size_t n = net.node_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  sp.dist.assign(n, kInf);
  sp.sigma.assign(n, 0.0);
  sp.preds.assign(n, {});
  sp.order.clear();
  std::vector<bool> done(n, false);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  sp.dist[source] = 0.0;
  sp.sigma[source] = 1.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = true;
    sp.order.push_back(u);
    for (const auto& nb : net.neighbors(u)) {
      const std::size_t v = nb.node;
      if (done[v]) continue;
      const double alt = d + path_length(nb.weight);
      if (sp.dist[v] == kInf || (alt < sp.dist[v] && !same_length(alt, sp.dist[v]))) {
        sp.dist[v] = alt;
        sp.sigma[v] = sp.sigma[u];
        sp.preds[v].assign(1, u);
        queue.emplace(alt, v);
      } else if (same_length(alt, sp.dist[v])) {
        sp.sigma[v] += sp.sigma[u];
        sp.preds[v].push_back(u);
      }
    }
  }
}

constexpr std::size_t kSourceBlock = 16;

// Runs `per_source(source, sp, partial)` for every node, accumulating into
// per-block partial vectors that are reduced in block order.
template <typename Fn>
Eigen::VectorXd reduce_over_sources(const QaNetwork& net, std::size_t parallelism, Fn per_source) {
  const std::size_t n = net.node_count();
  const std::size_t blocks = (n + kSourceBlock - 1) / kSourceBlock;
  std::vector<Eigen::VectorXd> partial(blocks, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
  parallel_for(blocks, parallelism, [&](std::size_t b) {
    ShortestPaths sp;
    const std::size_t end = std::min(n, (b + 1) * kSourceBlock);
    for (std::size_t s = b * kSourceBlock; s < end; ++s) per_source(s, sp, partial[b]);
  });
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace

CentralityScores pagerank(const QaNetwork& net, const PageRankParams& params) {
  CentralityMeasure measure{CentralityKind::pagerank, params, true};
  measure.validate();
  const std::size_t n = net.node_count();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "pagerank of an empty network");

  Eigen::VectorXd strength = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& nb : net.neighbors(i)) strength[static_cast<Eigen::Index>(i)] += nb.weight;
  }

  // transition(j, i) = w_ij / s_i: column i holds the out-distribution of i.
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<Eigen::Index> dangling;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = strength[static_cast<Eigen::Index>(i)];
    if (!(s > 0.0)) {
      dangling.push_back(static_cast<Eigen::Index>(i));
      continue;
    }
    for (const auto& nb : net.neighbors(i)) {
      if (nb.weight > 0.0) {
        triplets.emplace_back(static_cast<Eigen::Index>(nb.node), static_cast<Eigen::Index>(i),
                              nb.weight / s);
      }
    }
  }
  Eigen::SparseMatrix<double> transition(static_cast<Eigen::Index>(n),
                                         static_cast<Eigen::Index>(n));
  transition.setFromTriplets(triplets.begin(), triplets.end());

  const double d = params.damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), inv_n);
  Eigen::VectorXd next(static_cast<Eigen::Index>(n));

  CentralityScores scores = blank_scores(net, CentralityKind::pagerank);
  scores.measure = measure;
  scores.converged = false;
  for (int it = 1; it <= params.max_iters; ++it) {
    double dangling_mass = 0.0;
    for (const auto i : dangling) dangling_mass += x[i];
    next.noalias() = d * (transition * x);
    next.array() += (d * dangling_mass + (1.0 - d)) * inv_n;
    const double residual = (next - x).lpNorm<1>();
    x.swap(next);
    scores.iterations = it;
    scores.residual = residual;
    if (residual < params.tolerance) {
      scores.converged = true;
      break;
    }
  }
  scores.values = x;
  return scores;
}

CentralityScores degree_centrality(const QaNetwork& net, bool weighted) {
  CentralityScores scores = blank_scores(net, CentralityKind::degree);
  scores.measure.weighted_degree = weighted;
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    double total = 0.0;
    for (const auto& nb : net.neighbors(i)) total += weighted ? nb.weight : 1.0;
    scores.values[static_cast<Eigen::Index>(i)] = total;
  }
  return scores;
}

CentralityScores betweenness_centrality(const QaNetwork& net, std::size_t parallelism) {
  CentralityScores scores = blank_scores(net, CentralityKind::betweenness);
  const std::size_t n = net.node_count();
  if (n <= 2) return scores;

  Eigen::VectorXd raw = reduce_over_sources(
      net, parallelism, [&](std::size_t s, ShortestPaths& sp, Eigen::VectorXd& acc) {
        dijkstra(net, s, sp);
        std::vector<double> delta(n, 0.0);
        for (auto it = sp.order.rbegin(); it != sp.order.rend(); ++it) {
          const std::size_t w = *it;
          for (const std::size_t v : sp.preds[w]) {
            delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
          }
          if (w != s) acc[static_cast<Eigen::Index>(w)] += delta[w];
        }
      });
  // Each unordered pair was counted from both endpoints.
  const double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
  scores.values = raw * scale;
  return scores;
}

CentralityScores closeness_centrality(const QaNetwork& net, std::size_t parallelism) {
  CentralityScores scores = blank_scores(net, CentralityKind::closeness);
  const std::size_t n = net.node_count();
  if (n <= 1) return scores;
  scores.values = reduce_over_sources(
      net, parallelism, [&](std::size_t s, ShortestPaths& sp, Eigen::VectorXd& acc) {
        dijkstra(net, s, sp);
        double total = 0.0;
        for (const std::size_t v : sp.order) total += sp.dist[v];
        const double reach = static_cast<double>(sp.order.size() - 1);
        if (reach > 0.0 && total > 0.0) {
          acc[static_cast<Eigen::Index>(s)] =
              (reach / static_cast<double>(n - 1)) * (reach / total);
        }
      });
  return scores;
}

CentralityScores compute_centrality(const QaNetwork& net, const CentralityMeasure& measure,
                                    std::size_t parallelism) {
  measure.validate();
  CentralityScores scores;
  switch (measure.kind) {
    case CentralityKind::pagerank: scores = pagerank(net, measure.pagerank); break;
    case CentralityKind::degree: scores = degree_centrality(net, measure.weighted_degree); break;
    case CentralityKind::betweenness: scores = betweenness_centrality(net, parallelism); break;
    case CentralityKind::closeness: scores = closeness_centrality(net, parallelism); break;
  }
  scores.measure = measure;
  return scores;
}

std::vector<std::string> top_n_questions(const CentralityScores& scores, const QaNetwork& net,
                                         std::size_t n) {
  if (static_cast<std::size_t>(scores.values.size()) != net.node_count()) {
    throw Error(ErrorCode::invalid_argument, "scores were computed on a different network");
  }
  std::vector<std::size_t> questions(net.question_count());
  std::iota(questions.begin(), questions.end(), std::size_t{0});
  std::sort(questions.begin(), questions.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores.values[static_cast<Eigen::Index>(a)];
    const double sb = scores.values[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return net.node_id(a) < net.node_id(b);
  });
  questions.resize(std::min(n, questions.size()));
  std::vector<std::string> out;
  out.reserve(questions.size());
  for (const auto q : questions) out.push_back(net.node_id(q));
  return out;
}

}  // namespace qana
