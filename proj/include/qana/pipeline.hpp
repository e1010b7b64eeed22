#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qana/config.hpp"

namespace qana {

enum class Stage { ingest, qgen, embed, network, centrality, kpm, kpg };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// The end-to-end pipeline over one configuration. Stage outputs live in
/// `<output_dir>/<run_id>/`; the run id is a digest of the corpus and
/// every setting that affects results, so reruns land in the same directory.
///
/// Layout of a run directory:
///   corpus.jsonl, manifest.json  ingest
///   questions.jsonl, skips.jsonl qgen
///   embeddings/                  embed (binary vectors + JSONL index)
///   networks.json                network
///   centrality_scores.csv        centrality
///   kpm.json, kpm.csv            kpm
///   threshold.json, kpg.json, kpg_curves.csv   kpg
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::ostream& log);
  ~Pipeline();

  const std::string& run_id() const { return run_id_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }

  /// Runs every stage in order, recomputing even when outputs exist.
  void run();

  /// Runs one stage. A stage whose outputs already exist is skipped with a
  /// notice unless `force`. Throws MissingUpstream when inputs are absent.
  /// Returns false when the stage was skipped.
  bool run_stage(Stage stage, bool force = false);

  /// Calls that reached the generation backend (cache hits excluded).
  std::size_t generation_calls() const;
  /// Texts sent to the embedding backend (cache hits excluded).
  std::size_t embedded_texts() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string run_id_;
  std::filesystem::path run_dir_;
};

/// Subcommand entry points; errors are reported on `err` and mapped to exit
/// codes (configuration problems -> 2, everything else -> 1).
int cmd_run(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_stage(Stage stage, const PipelineConfig& config, bool force, std::ostream& out,
              std::ostream& err);
int cmd_validate(const std::filesystem::path& corpus, CorpusFormat format, std::string_view split,
                 std::ostream& out, std::ostream& err);
/// Collects kpm.json / kpg.json from every run under `runs_dir` into grid CSVs.
int cmd_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out_dir,
               std::ostream& out, std::ostream& err);

}  // namespace qana

namespace qana {

/// Command-line front end; `args` excludes the program name. Returns the
/// process exit code.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qana
