#include "qana/kpm_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "qana/error.hpp"

namespace qana {

MatchScore aggregate_match(const Argument& argument, const KeyPoint& key_point,
                           std::span<const Question> questions, const EmbeddingTable& embeddings) {
  if (questions.empty()) {
    throw Error(ErrorCode::empty_question_set, "argument '" + argument.id + "' has no questions");
  }
  const Embedding& kp = embeddings.at(key_point.id);
  std::vector<double> sims;
  sims.reserve(questions.size());
  for (const auto& q : questions) {
    if (q.source_arg_id != argument.id) {
      throw Error(ErrorCode::invalid_argument,
                  "question '" + q.id + "' does not come from argument '" + argument.id + "'");
    }
    sims.push_back(cosine(embeddings.at(q.id), kp));
  }
  std::sort(sims.begin(), sims.end());
  double sum = 0.0;
  for (const double s : sims) sum += s;
  return {argument.id, key_point.id, sum / static_cast<double>(sims.size())};
}

double strict_average_precision(std::span<const MatchScore> scored_pairs, const LabelIndex& labels,
                                double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "truncation fraction must lie in (0, 1]");
  }
  std::map<std::string, const MatchScore*> best;
  for (const auto& p : scored_pairs) {
    auto [it, inserted] = best.emplace(p.arg_id, &p);
    if (inserted) continue;
    const MatchScore* cur = it->second;
    if (p.score > cur->score || (p.score == cur->score && p.kp_id < cur->kp_id)) it->second = &p;
  }
  std::vector<const MatchScore*> ranked;
  ranked.reserve(best.size());
  for (const auto& [arg, p] : best) ranked.push_back(p);
  std::sort(ranked.begin(), ranked.end(), [](const MatchScore* a, const MatchScore* b) {
    if (a->score != b->score) return a->score > b->score;
    return std::tie(a->arg_id, a->kp_id) < std::tie(b->arg_id, b->kp_id);
  });
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ranked.size())));
  ranked.resize(std::min(keep, ranked.size()));

  double precision_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (labels.get(ranked[i]->arg_id, ranked[i]->kp_id) != Label::match) continue;
    ++hits;
    precision_sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits == 0 ? 0.0 : precision_sum / static_cast<double>(hits);
}

KpmReport evaluate_kpm(const Corpus& corpus, std::span<const Question> questions,
                       const EmbeddingTable& embeddings, const KpmOptions& options,
                       ConfigFingerprint fingerprint) {
  std::map<std::string, std::vector<Question>> by_argument;
  for (const auto& q : questions) by_argument[q.source_arg_id].push_back(q);

  KpmReport report;
  report.truncation = options.truncation;
  report.fingerprint = std::move(fingerprint);

  for (const SliceKey& key : corpus.slice_keys()) {
    const Corpus part = slice(corpus, key.topic_id, key.stance);
    const bool has_positive =
        std::any_of(part.annotations().begin(), part.annotations().end(),
                    [](const MatchAnnotation& m) { return m.label == Label::match; });
    if (part.arguments().empty() || part.key_points().empty() || !has_positive) {
      report.excluded.push_back(key);
      continue;
    }

    std::vector<MatchScore> scores;
    scores.reserve(part.arguments().size() * part.key_points().size());
    for (const auto& arg : part.arguments()) {
      std::vector<Question> own;
      if (const auto it = by_argument.find(arg.id); it != by_argument.end()) {
        own = it->second;
      } else {
        own.push_back({arg.id, arg.id, GenerationStyle::original, arg.text, "identity"});
        report.fallback_args.push_back(arg.id);
      }
      for (const auto& kp : part.key_points()) {
        scores.push_back(aggregate_match(arg, kp, own, embeddings));
      }
    }
    report.per_slice.push_back({key,
                                strict_average_precision(scores, corpus.labels(), options.truncation),
                                part.arguments().size(), part.key_points().size()});
  }

  double sum = 0.0;
  for (const auto& s : report.per_slice) sum += s.ap;
  report.overall_map =
      report.per_slice.empty() ? 0.0 : sum / static_cast<double>(report.per_slice.size());
  return report;
}

KpmReport evaluate_kpm(const Corpus& corpus, std::span<const Question> questions,
                       EmbeddingBackend& backend, EmbeddingCache* cache,
                       const KpmOptions& options, ConfigFingerprint fingerprint) {
  std::set<std::string> covered;
  for (const auto& q : questions) covered.insert(q.source_arg_id);

  std::vector<std::string> ids;
  std::vector<std::string> texts;
  for (const auto& q : questions) {
    ids.push_back(q.id);
    texts.push_back(q.text);
  }
  for (const auto& k : corpus.key_points()) {
    ids.push_back(k.id);
    texts.push_back(k.text);
  }
  for (const auto& a : corpus.arguments()) {
    if (covered.contains(a.id)) continue;
    ids.push_back(a.id);
    texts.push_back(a.text);
  }
  auto vectors = embed_texts(texts, backend, cache);
  EmbeddingTable table;
  for (std::size_t i = 0; i < ids.size(); ++i) table.insert(ids[i], std::move(vectors[i]));
  return evaluate_kpm(corpus, questions, table, options, std::move(fingerprint));
}

}  // namespace qana
