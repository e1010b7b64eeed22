#include "qana/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "qana/error.hpp"
#include "qana/parallel.hpp"

namespace qana {

using nlohmann::json;

SparsificationPolicy SparsificationPolicy::weight_threshold(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "weight threshold must lie in [0, 1]");
  }
  return {Kind::weight_threshold, tau, 0};
}

SparsificationPolicy SparsificationPolicy::top_k(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "top_k needs k >= 1");
  return {Kind::top_k, 0.0, k};
}

std::string SparsificationPolicy::describe() const {
  switch (kind) {
    case Kind::complete: return "complete";
    case Kind::weight_threshold: {
      std::ostringstream ss;
      ss.precision(17);
      ss << "threshold:" << threshold;
      return ss.str();
    }
    case Kind::top_k: return "top_k:" + std::to_string(k);
  }
  return "invalid";
}

SparsificationPolicy SparsificationPolicy::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string arg =
      colon == std::string_view::npos ? std::string() : std::string(text.substr(colon + 1));
  try {
    if (name == "complete" && arg.empty()) return complete();
    if ((name == "threshold" || name == "weight_threshold") && !arg.empty()) {
      std::size_t used = 0;
      const double tau = std::stod(arg, &used);
      if (used == arg.size()) return weight_threshold(tau);
    }
    if (name == "top_k" && !arg.empty()) {
      std::size_t used = 0;
      const long long k = std::stoll(arg, &used);
      if (used == arg.size() && k > 0) return top_k(static_cast<std::size_t>(k));
    }
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorCode::invalid_argument, "unknown sparsification policy '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

QaNetwork::QaNetwork(std::vector<std::string> question_nodes,
                     std::vector<std::string> argument_nodes, std::vector<QaEdge> edges,
                     SparsificationPolicy policy, std::string embedding_model,
                     std::string created_at)
    : question_nodes_(std::move(question_nodes)),
      argument_nodes_(std::move(argument_nodes)),
      edges_(std::move(edges)),
      policy_(policy),
      embedding_model_(std::move(embedding_model)),
      created_at_(std::move(created_at)) {
  const std::size_t n = node_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(node_id(i), i).second) {
      throw Error(ErrorCode::format_error, "duplicate node id '" + node_id(i) + "'");
    }
  }
  std::vector<std::vector<Neighbor>> lists(n);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges_) {
    const auto q = index_of(e.question_id);
    const auto a = index_of(e.argument_id);
    if (!q || role(*q) != NodeRole::question) {
      throw Error(ErrorCode::format_error, "edge endpoint '" + e.question_id + "' is not a question node");
    }
    if (!a || role(*a) != NodeRole::argument) {
      throw Error(ErrorCode::format_error, "edge endpoint '" + e.argument_id + "' is not an argument node");
    }
    if (!(e.weight >= 0.0 && e.weight <= 1.0)) {
      throw Error(ErrorCode::format_error, "edge weight outside [0, 1]");
    }
    if (!seen.emplace(*q, *a).second) {
      throw Error(ErrorCode::format_error,
                  "duplicate edge (" + e.question_id + ", " + e.argument_id + ")");
    }
    lists[*q].push_back({*a, e.weight});
    lists[*a].push_back({*q, e.weight});
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(lists[i].begin(), lists[i].end(),
              [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
    offsets_[i + 1] = offsets_[i] + lists[i].size();
    adjacency_.insert(adjacency_.end(), lists[i].begin(), lists[i].end());
  }
}

std::optional<std::size_t> QaNetwork::index_of(std::string_view node_id) const {
  const auto it = index_.find(std::string(node_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& QaNetwork::node_id(std::size_t index) const {
  return index < question_nodes_.size() ? question_nodes_[index]
                                        : argument_nodes_[index - question_nodes_.size()];
}

bool operator==(const QaNetwork& a, const QaNetwork& b) {
  if (a.question_nodes_ != b.question_nodes_ || a.argument_nodes_ != b.argument_nodes_ ||
      !(a.policy_ == b.policy_) || a.embedding_model_ != b.embedding_model_ ||
      a.created_at_ != b.created_at_ || a.edges_.size() != b.edges_.size()) {
    return false;
  }
  auto sorted = [](std::vector<QaEdge> edges) {
    std::sort(edges.begin(), edges.end(), [](const QaEdge& x, const QaEdge& y) {
      return std::tie(x.question_id, x.argument_id) < std::tie(y.question_id, y.argument_id);
    });
    return edges;
  };
  return sorted(a.edges_) == sorted(b.edges_);
}

// ---------------------------------------------------------------------------

QaNetwork build_network(std::span<const Question> questions, std::span<const Argument> arguments,
                        const EmbeddingTable& embeddings, const SparsificationPolicy& policy,
                        const BuildOptions& options) {
  std::vector<const Embedding*> q_emb;
  std::vector<const Embedding*> a_emb;
  for (const auto& q : questions) q_emb.push_back(&embeddings.at(q.id));
  for (const auto& a : arguments) a_emb.push_back(&embeddings.at(a.id));

  std::vector<std::vector<QaEdge>> rows(questions.size());
  parallel_for(questions.size(), options.parallelism, [&](std::size_t qi) {
    std::vector<std::pair<std::size_t, double>> kept;
    for (std::size_t ai = 0; ai < arguments.size(); ++ai) {
      const double w = std::max(0.0, cosine(*q_emb[qi], *a_emb[ai]));
      if (w <= 0.0) continue;
      if (policy.kind == SparsificationPolicy::Kind::weight_threshold && w < policy.threshold) {
        continue;
      }
      kept.emplace_back(ai, w);
    }
    if (policy.kind == SparsificationPolicy::Kind::top_k && kept.size() > policy.k) {
      std::stable_sort(kept.begin(), kept.end(), [&](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return arguments[x.first].id < arguments[y.first].id;
      });
      kept.resize(policy.k);
      std::sort(kept.begin(), kept.end());
    }
    for (const auto& [ai, w] : kept) rows[qi].push_back({questions[qi].id, arguments[ai].id, w});
  });

  std::vector<std::string> q_nodes, a_nodes;
  for (const auto& q : questions) q_nodes.push_back(q.id);
  for (const auto& a : arguments) a_nodes.push_back(a.id);
  std::vector<QaEdge> edges;
  for (auto& r : rows) {
    for (auto& e : r) edges.push_back(std::move(e));
  }
  std::string model;
  if (!q_emb.empty()) {
    model = q_emb.front()->model;
  } else if (!a_emb.empty()) {
    model = a_emb.front()->model;
  }
  return QaNetwork(std::move(q_nodes), std::move(a_nodes), std::move(edges), policy,
                   std::move(model), options.created_at);
}

double degree_strength(const QaNetwork& net, std::string_view node_id) {
  const auto index = net.index_of(node_id);
  if (!index) throw Error(ErrorCode::unknown_node, "unknown node '" + std::string(node_id) + "'");
  double sum = 0.0;
  for (const auto& nb : net.neighbors(*index)) sum += nb.weight;
  return sum;
}

// ---------------------------------------------------------------------------

std::string serialize_network(const QaNetwork& net) {
  json policy = {{"kind", net.policy().kind == SparsificationPolicy::Kind::complete ? "complete"
                          : net.policy().kind == SparsificationPolicy::Kind::top_k
                              ? "top_k"
                              : "weight_threshold"}};
  if (net.policy().kind == SparsificationPolicy::Kind::top_k) policy["k"] = net.policy().k;
  if (net.policy().kind == SparsificationPolicy::Kind::weight_threshold) {
    policy["threshold"] = net.policy().threshold;
  }
  json edges = json::array();
  for (const auto& e : net.edges()) edges.push_back({e.question_id, e.argument_id, e.weight});
  const json doc = {
      {"format", "qana-network/1"},
      {"embedding_model", net.embedding_model()},
      {"created_at", net.created_at()},
      {"policy", policy},
      {"question_nodes", net.question_nodes()},
      {"argument_nodes", net.argument_nodes()},
      {"edges", edges},
  };
  return doc.dump(1) + "\n";
}

QaNetwork deserialize_network(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "qana-network/1") {
      throw Error(ErrorCode::format_error, "unsupported network format");
    }
    const json& p = doc.at("policy");
    const std::string kind = p.at("kind").get<std::string>();
    SparsificationPolicy policy;
    if (kind == "complete") {
      policy = SparsificationPolicy::complete();
    } else if (kind == "top_k") {
      policy = SparsificationPolicy::top_k(p.at("k").get<std::size_t>());
    } else if (kind == "weight_threshold") {
      policy = SparsificationPolicy::weight_threshold(p.at("threshold").get<double>());
    } else {
      throw Error(ErrorCode::format_error, "unknown policy kind '" + kind + "'");
    }
    std::vector<QaEdge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw Error(ErrorCode::format_error, "malformed edge");
      edges.push_back({e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<double>()});
    }
    return QaNetwork(doc.at("question_nodes").get<std::vector<std::string>>(),
                     doc.at("argument_nodes").get<std::vector<std::string>>(), std::move(edges),
                     policy, doc.at("embedding_model").get<std::string>(),
                     doc.at("created_at").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("malformed network document: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::format_error) throw;
    throw Error(ErrorCode::format_error, e.what());
  }
}

}  // namespace qana
