#pragma once

#include <span>
#include <string>
#include <vector>

#include "qana/centrality.hpp"
#include "qana/corpus.hpp"
#include "qana/embed.hpp"
#include "qana/fingerprint.hpp"
#include "qana/network.hpp"

namespace qana {

struct LabeledSimilarity {
  double similarity = 0.0;
  bool positive = false;
};

enum class ThresholdRule {
  youden,             // maximize TPR - FPR
  closest_to_corner,  // minimize distance of (FPR, TPR) to (0, 1)
};

struct Threshold {
  double theta = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  std::string source;  // embedding model the similarities came from
};

/// Scans every cut midway between consecutive distinct similarities, plus
/// -inf and +inf, predicting positive when similarity >= cut. Ties between
/// equally good cuts resolve to the larger cut. Throws DegenerateLabels
/// when only one class is present.
Threshold select_threshold(std::span<const LabeledSimilarity> pairs,
                           ThresholdRule rule = ThresholdRule::youden, std::string source = {});

/// (cosine(argument, key point), label == match) for every annotated pair;
/// undecided annotations are left out.
std::vector<LabeledSimilarity> threshold_pairs(const Corpus& corpus,
                                               const EmbeddingTable& embeddings);

/// Greedy scan in rank order admitting a question only if its similarity to
/// every admitted question is below theta. Stops after n admissions.
std::vector<std::string> dedup_top_n(std::span<const std::string> ranked,
                                     const EmbeddingTable& embeddings, double theta, std::size_t n);

/// Fraction of true key points whose best similarity to a predicted question
/// reaches theta. Throws EmptyTruth.
double coverage_at_n(std::span<const KeyPoint> truth, std::span<const std::string> predicted,
                     const EmbeddingTable& embeddings, double theta);

struct SliceNetwork {
  SliceKey slice;
  QaNetwork network;
};

struct SliceCurve {
  SliceKey slice;
  std::vector<double> coverage;        // index n-1 holds Coverage@n
  std::vector<std::string> predicted;  // deduplicated ranking, up to n_max
};

struct KpgReport {
  CentralityMeasure measure;
  Threshold threshold;
  std::size_t n_max = 0;
  std::vector<double> curve;  // mean over per_slice, index n-1
  std::vector<SliceCurve> per_slice;
  std::vector<SliceKey> excluded;  // no key points or no questions
  ConfigFingerprint fingerprint;
};

/// Ranks each slice network's questions by `measure`, deduplicates, and
/// averages Coverage@n over slices for n = 1..n_max.
KpgReport evaluate_kpg(const Corpus& corpus, std::span<const SliceNetwork> networks,
                       const CentralityMeasure& measure, const EmbeddingTable& embeddings,
                       const Threshold& threshold, std::size_t n_max,
                       ConfigFingerprint fingerprint = {}, std::size_t parallelism = 1);

}  // namespace qana
