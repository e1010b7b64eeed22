#pragma once

#include <span>
#include <string>
#include <vector>

#include "qana/corpus.hpp"
#include "qana/embed.hpp"
#include "qana/fingerprint.hpp"
#include "qana/qgen.hpp"

namespace qana {

struct MatchScore {
  std::string arg_id;
  std::string kp_id;
  double score = 0.0;
  friend bool operator==(const MatchScore&, const MatchScore&) = default;
};

/// Mean cosine between the argument's questions and the key point. The
/// member similarities are summed in sorted order, so the result does not
/// depend on the order of `questions`. Throws EmptyQuestionSet or
/// MissingEmbedding.
MatchScore aggregate_match(const Argument& argument, const KeyPoint& key_point,
                           std::span<const Question> questions, const EmbeddingTable& embeddings);

/// Strict average precision over argument-level best matches:
///  1. each argument keeps its highest-scoring key point (ties: smaller kp_id);
///  2. those pairs are sorted by score descending (ties: arg_id, kp_id);
///  3. only the top ceil(fraction * count) are kept;
///  4. AP is the mean of precision@i over positions holding a `match`.
/// Undecided and unannotated pairs count as negatives. No positives -> 0.
double strict_average_precision(std::span<const MatchScore> scored_pairs, const LabelIndex& labels,
                                double fraction = 0.5);

struct SliceAp {
  SliceKey slice;
  double ap = 0.0;
  std::size_t n_args = 0;
  std::size_t n_kps = 0;
};

struct KpmReport {
  std::vector<SliceAp> per_slice;        // slices contributing to the mean
  std::vector<SliceKey> excluded;        // no annotated positives, or empty
  std::vector<std::string> fallback_args;  // scored via their own text
  double overall_map = 0.0;
  double truncation = 0.5;
  ConfigFingerprint fingerprint;
};

struct KpmOptions {
  double truncation = 0.5;
};

/// Per-(topic, stance) strict AP and their unweighted mean. Arguments with no
/// questions fall back to their own embedding and are listed in the report.
KpmReport evaluate_kpm(const Corpus& corpus, std::span<const Question> questions,
                       const EmbeddingTable& embeddings, const KpmOptions& options = {},
                       ConfigFingerprint fingerprint = {});

/// Embeds every question and key point once through `backend`
/// (|Q| + |K| texts, never per pair), then evaluates.
KpmReport evaluate_kpm(const Corpus& corpus, std::span<const Question> questions,
                       EmbeddingBackend& backend, EmbeddingCache* cache,
                       const KpmOptions& options = {}, ConfigFingerprint fingerprint = {});

}  // namespace qana
