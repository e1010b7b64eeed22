#include "qana/kpg_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qana/error.hpp"

namespace qana {

Threshold select_threshold(std::span<const LabeledSimilarity> pairs, ThresholdRule rule,
                           std::string source) {
  std::vector<LabeledSimilarity> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.similarity < b.similarity; });
  std::size_t positives = 0;
  for (const auto& p : sorted) positives += p.positive ? 1 : 0;
  const std::size_t negatives = sorted.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::degenerate_labels, "threshold selection needs both classes");
  }
  const double P = static_cast<double>(positives);
  const double N = static_cast<double>(negatives);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  Threshold best;
  double best_score = -kInf;
  auto consider = [&](double cut, std::size_t tp, std::size_t fp) {
    const double tpr = static_cast<double>(tp) / P;
    const double fpr = static_cast<double>(fp) / N;
    const double score = rule == ThresholdRule::youden
                             ? tpr - fpr
                             : -((1.0 - tpr) * (1.0 - tpr) + fpr * fpr);
    // Cuts are visited in increasing order, so >= prefers the larger cut.
    if (score >= best_score) {
      best_score = score;
      best.theta = cut;
      best.tpr = tpr;
      best.fpr = fpr;
    }
  };

  // Sweep upward; tp/fp count items with similarity >= cut.
  std::size_t tp = positives;
  std::size_t fp = negatives;
  consider(-kInf, tp, fp);
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double value = sorted[i].similarity;
    while (i < sorted.size() && sorted[i].similarity == value) {
      (sorted[i].positive ? tp : fp) -= 1;
      ++i;
    }
    const double cut = i < sorted.size() ? (value + sorted[i].similarity) / 2.0 : kInf;
    consider(cut, tp, fp);
  }
  best.source = std::move(source);
  return best;
}

std::vector<LabeledSimilarity> threshold_pairs(const Corpus& corpus,
                                               const EmbeddingTable& embeddings) {
  std::vector<LabeledSimilarity> out;
  for (const auto& m : corpus.annotations()) {
    if (m.label == Label::undecided) continue;
    out.push_back({cosine(embeddings.at(m.arg_id), embeddings.at(m.kp_id)),
                   m.label == Label::match});
  }
  return out;
}

std::vector<std::string> dedup_top_n(std::span<const std::string> ranked,
                                     const EmbeddingTable& embeddings, double theta,
                                     std::size_t n) {
  std::vector<std::string> admitted;
  std::vector<const Embedding*> admitted_vectors;
  for (const auto& id : ranked) {
    if (admitted.size() >= n) break;
    const Embedding& e = embeddings.at(id);
    const bool duplicate = std::any_of(admitted_vectors.begin(), admitted_vectors.end(),
                                       [&](const Embedding* a) { return cosine(*a, e) >= theta; });
    if (duplicate) continue;
    admitted.push_back(id);
    admitted_vectors.push_back(&e);
  }
  return admitted;
}

double coverage_at_n(std::span<const KeyPoint> truth, std::span<const std::string> predicted,
                     const EmbeddingTable& embeddings, double theta) {
  if (truth.empty()) throw Error(ErrorCode::empty_truth, "no true key points to cover");
  std::vector<const Embedding*> pred;
  for (const auto& id : predicted) pred.push_back(&embeddings.at(id));
  std::size_t covered = 0;
  for (const auto& k : truth) {
    const Embedding& ke = embeddings.at(k.id);
    double best = -std::numeric_limits<double>::infinity();
    for (const Embedding* q : pred) best = std::max(best, cosine(ke, *q));
    if (!pred.empty() && best >= theta) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(truth.size());
}

KpgReport evaluate_kpg(const Corpus& corpus, std::span<const SliceNetwork> networks,
                       const CentralityMeasure& measure, const EmbeddingTable& embeddings,
                       const Threshold& threshold, std::size_t n_max,
                       ConfigFingerprint fingerprint, std::size_t parallelism) {
  if (n_max == 0) throw Error(ErrorCode::invalid_argument, "n_max must be positive");
  KpgReport report;
  report.measure = measure;
  report.threshold = threshold;
  report.n_max = n_max;
  report.fingerprint = std::move(fingerprint);

  for (const auto& sn : networks) {
    const Corpus part = slice(corpus, sn.slice.topic_id, sn.slice.stance);
    if (part.key_points().empty() || sn.network.question_count() == 0) {
      report.excluded.push_back(sn.slice);
      continue;
    }
    const CentralityScores scores = compute_centrality(sn.network, measure, parallelism);
    const auto ranked = top_n_questions(scores, sn.network, sn.network.question_count());

    SliceCurve curve{sn.slice, {}, dedup_top_n(ranked, embeddings, threshold.theta, n_max)};
    for (std::size_t n = 1; n <= n_max; ++n) {
      const std::size_t take = std::min(n, curve.predicted.size());
      const std::span<const std::string> top(curve.predicted.data(), take);
      curve.coverage.push_back(coverage_at_n(part.key_points(), top, embeddings, threshold.theta));
    }
    report.per_slice.push_back(std::move(curve));
  }

  report.curve.assign(n_max, 0.0);
  for (std::size_t n = 0; n < n_max; ++n) {
    double sum = 0.0;
    for (const auto& c : report.per_slice) sum += c.coverage[n];
    report.curve[n] =
        report.per_slice.empty() ? 0.0 : sum / static_cast<double>(report.per_slice.size());
  }
  return report;
}

}  // namespace qana
