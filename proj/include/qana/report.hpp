#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qana/centrality.hpp"
#include "qana/kpg_eval.hpp"
#include "qana/kpm_eval.hpp"

namespace qana {

struct RunManifest {
  std::string run_id;
  std::string corpus_hash;
  std::string style;
  std::string generator;
  std::string embedding;
  std::string policy;
  std::vector<std::string> measures;
  std::string template_version;
  std::size_t n_max = 0;
  double truncation = 0.5;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, std::string> versions;
};

nlohmann::json to_json(const RunManifest& manifest);
nlohmann::json to_json(const KpmReport& report);
nlohmann::json to_json(const KpgReport& report);
KpmReport kpm_report_from_json(const nlohmann::json& j);
KpgReport kpg_report_from_json(const nlohmann::json& j);

using EvalReport = std::variant<KpmReport, KpgReport>;

struct GridFiles {
  std::filesystem::path kpm_csv;
  std::filesystem::path kpg_csv;
};

/// Writes kpm_grid.csv and kpg_grid.csv under `out_dir`, one row per
/// configuration, sorted by (style, generator, embedding, policy, measure).
/// Both files are always written, header-only when empty. Throws
/// MixedCorpora if the reports disagree on the corpus hash.
GridFiles emit_grid_report(std::span<const EvalReport> reports,
                           const std::filesystem::path& out_dir);

/// Long-format plot data. KPM: `topic,stance,ap,n_args,n_kps`, one row per
/// slice. KPG: `measure,style,n,coverage`, one row per n and report.
std::string render_plot_data(const KpmReport& report);
std::string render_plot_data(std::span<const KpgReport> reports);

struct SliceScores {
  SliceKey slice;
  const QaNetwork* network;
  std::vector<CentralityScores> scores;
};

/// `node_id,role,measure,score,rank`; rank is 1-based within the slice
/// network and measure (score descending, ties by node id).
std::string render_centrality_scores(std::span<const SliceScores> slices);

}  // namespace qana
