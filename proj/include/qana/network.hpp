#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qana/corpus.hpp"
#include "qana/embed.hpp"
#include "qana/qgen.hpp"

namespace qana {

/// Which question-argument pairs become edges. Every policy drops pairs whose
/// clamped similarity is zero.
struct SparsificationPolicy {
  enum class Kind { complete, weight_threshold, top_k };

  Kind kind = Kind::top_k;
  double threshold = 0.0;  // weight_threshold: keep weight >= threshold
  std::size_t k = 10;      // top_k: per question

  static SparsificationPolicy complete() { return {Kind::complete, 0.0, 0}; }
  static SparsificationPolicy weight_threshold(double tau);
  static SparsificationPolicy top_k(std::size_t k);

  /// "complete", "threshold:0.5", "top_k:10".
  std::string describe() const;
  static SparsificationPolicy parse(std::string_view text);

  friend bool operator==(const SparsificationPolicy&, const SparsificationPolicy&) = default;
};

struct QaEdge {
  std::string question_id;
  std::string argument_id;
  double weight = 0.0;
  friend bool operator==(const QaEdge&, const QaEdge&) = default;
};

enum class NodeRole { question, argument };

/// Weighted bipartite graph between question nodes and argument nodes.
///
/// Nodes are indexed questions first, then arguments, in declaration order.
/// The constructor enforces the invariants (unique node ids, resolvable
/// endpoints, weights in [0, 1], no duplicate edge) and throws FormatError.
class QaNetwork {
 public:
  struct Neighbor {
    std::size_t node;
    double weight;
  };

  QaNetwork() = default;
  QaNetwork(std::vector<std::string> question_nodes, std::vector<std::string> argument_nodes,
            std::vector<QaEdge> edges,
            SparsificationPolicy policy = SparsificationPolicy::complete(),
            std::string embedding_model = {}, std::string created_at = {});

  const std::vector<std::string>& question_nodes() const { return question_nodes_; }
  const std::vector<std::string>& argument_nodes() const { return argument_nodes_; }
  const std::vector<QaEdge>& edges() const { return edges_; }
  const SparsificationPolicy& policy() const { return policy_; }
  const std::string& embedding_model() const { return embedding_model_; }
  const std::string& created_at() const { return created_at_; }

  std::size_t node_count() const { return question_nodes_.size() + argument_nodes_.size(); }
  std::size_t question_count() const { return question_nodes_.size(); }
  std::optional<std::size_t> index_of(std::string_view node_id) const;
  const std::string& node_id(std::size_t index) const;
  NodeRole role(std::size_t index) const {
    return index < question_nodes_.size() ? NodeRole::question : NodeRole::argument;
  }
  /// Incident edges of `index`, ordered by neighbor index.
  std::span<const Neighbor> neighbors(std::size_t index) const {
    return {adjacency_.data() + offsets_[index], offsets_[index + 1] - offsets_[index]};
  }

  /// Node lists, policy and metadata must match; edges compare as a set.
  friend bool operator==(const QaNetwork& a, const QaNetwork& b);

 private:
  std::vector<std::string> question_nodes_;
  std::vector<std::string> argument_nodes_;
  std::vector<QaEdge> edges_;
  SparsificationPolicy policy_ = SparsificationPolicy::complete();
  std::string embedding_model_;
  std::string created_at_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
};

struct BuildOptions {
  std::string created_at;
  std::size_t parallelism = 1;
};

/// Edge weight = max(0, cosine(question, argument)); retention per policy.
/// top_k keeps, for each question, its k heaviest positive edges (ties by
/// argument id). Questions are never linked to their source argument by
/// provenance alone. Throws MissingEmbedding or DimensionMismatch.
QaNetwork build_network(std::span<const Question> questions, std::span<const Argument> arguments,
                        const EmbeddingTable& embeddings, const SparsificationPolicy& policy,
                        const BuildOptions& options = {});

/// Sum of incident edge weights. Throws UnknownNode.
double degree_strength(const QaNetwork& net, std::string_view node_id);

std::string serialize_network(const QaNetwork& net);
/// Throws FormatError on malformed or truncated input.
QaNetwork deserialize_network(std::string_view text);

}  // namespace qana
