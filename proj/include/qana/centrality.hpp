#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qana/network.hpp"

namespace qana {

enum class CentralityKind { pagerank, degree, betweenness, closeness };

std::string_view to_string(CentralityKind kind);
std::optional<CentralityKind> parse_centrality(std::string_view name);

struct PageRankParams {
  double damping = 0.85;
  double tolerance = 1e-9;  // L1 change between iterates
  int max_iters = 10'000;
};

struct CentralityMeasure {
  CentralityKind kind = CentralityKind::pagerank;
  PageRankParams pagerank;
  bool weighted_degree = true;  // strength rather than edge count

  /// Throws InvalidArgument unless damping is in (0, 1) and tolerance > 0.
  void validate() const;
  std::string name() const { return std::string(to_string(kind)); }
};

/// Length used by the path-based measures: similarity 1 maps to a distance
/// of epsilon, never to zero.
inline constexpr double kPathEpsilon = 1e-6;
inline double path_length(double weight) { return 1.0 - weight + kPathEpsilon; }

/// Per-node scores aligned with the network's node indexing.
struct CentralityScores {
  CentralityMeasure measure;
  std::vector<std::string> node_ids;
  Eigen::VectorXd values;

  // PageRank convergence report; trivially true for the other measures.
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;

  /// Throws UnknownNode.
  double at(std::string_view node_id) const;
};

/// Power iteration on the weighted random walk of the undirected graph.
/// Dangling nodes jump uniformly. On hitting max_iters the last iterate is
/// returned with converged = false. Throws InvalidArgument on an empty net.
CentralityScores pagerank(const QaNetwork& net, const PageRankParams& params = {});

CentralityScores degree_centrality(const QaNetwork& net, bool weighted = true);

/// Shortest-path betweenness under path_length(), normalized by
/// (n-1)(n-2)/2 for n > 2. Per-source work is split into fixed blocks and
/// reduced in block order, so the result does not depend on `parallelism`.
CentralityScores betweenness_centrality(const QaNetwork& net, std::size_t parallelism = 1);

/// Closeness with the Wasserman-Faust component correction:
/// ((r-1)/(N-1)) * ((r-1)/sum of distances), r = reachable nodes incl. self.
CentralityScores closeness_centrality(const QaNetwork& net, std::size_t parallelism = 1);

CentralityScores compute_centrality(const QaNetwork& net, const CentralityMeasure& measure,
                                    std::size_t parallelism = 1);

/// Question nodes only, by score descending with ties broken by id.
std::vector<std::string> top_n_questions(const CentralityScores& scores, const QaNetwork& net,
                                         std::size_t n);

/// Relative tolerance under which two path lengths count as equal.
inline constexpr double kPathTieTolerance = 1e-12;

}  // namespace qana
