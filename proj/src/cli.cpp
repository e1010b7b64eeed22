#include <CLI11.hpp>
#include <optional>
#include <sstream>

#include "qana/config.hpp"
#include "qana/error.hpp"
#include "qana/pipeline.hpp"

namespace qana {

namespace {

struct Overrides {
  std::string config;
  std::string corpus;
  std::string format;
  std::string split;
  std::string style;
  std::string generator;
  std::string fixture;
  std::string embedding;
  std::string policy;
  std::vector<std::string> measures;
  std::optional<std::size_t> n_max;
  std::optional<double> truncation;
  std::optional<double> theta;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  std::string cache_dir;
  std::string output_dir;
};

void add_pipeline_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("-c,--config", o.config, "Pipeline config file");
  cmd.add_option("--corpus", o.corpus, "Corpus path (overrides corpus.path)");
  cmd.add_option("--format", o.format, "Corpus format: argkp_csv or jsonl");
  cmd.add_option("--split", o.split, "Corpus split suffix");
  cmd.add_option("--style", o.style, "Question style: closed, open, hybrid, paraphrase, original");
  cmd.add_option("--generator", o.generator, "Generation backend: mock or openai");
  cmd.add_option("--fixture", o.fixture, "Mock generation fixture (JSONL)");
  cmd.add_option("--embedding", o.embedding, "Embedding backend: mock or openai");
  cmd.add_option("--policy", o.policy, "Sparsification: complete, threshold:<w>, top_k:<k>");
  cmd.add_option("--measure", o.measures, "Centrality measure (repeatable)");
  cmd.add_option("--n-max", o.n_max, "Largest n for Coverage@n");
  cmd.add_option("--truncation", o.truncation, "Fraction of ranked arguments kept for AP");
  cmd.add_option("--theta", o.theta, "Fixed coverage threshold");
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--parallelism", o.parallelism, "Worker thread limit");
  cmd.add_option("--cache-dir", o.cache_dir, "Cache directory");
  cmd.add_option("--output-dir", o.output_dir, "Output directory");
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  auto fail = [](const std::string& what) { throw Error(ErrorCode::config_error, what); };
  if (!o.corpus.empty()) c.corpus_path = o.corpus;
  if (!o.format.empty()) {
    const auto f = parse_corpus_format(o.format);
    if (!f) fail("unknown corpus format '" + o.format + "'");
    c.corpus_format = *f;
  }
  if (!o.split.empty()) c.corpus_split = o.split;
  if (!o.style.empty()) {
    const auto s = parse_style(o.style);
    if (!s) fail("unknown question style '" + o.style + "'");
    c.style = *s;
  }
  if (!o.generator.empty()) c.generator = o.generator;
  if (!o.fixture.empty()) c.generator_fixture = o.fixture;
  if (!o.embedding.empty()) c.embedding = o.embedding;
  if (!o.policy.empty()) {
    try {
      c.policy = SparsificationPolicy::parse(o.policy);
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (!o.measures.empty()) {
    c.measures.clear();
    for (const auto& name : o.measures) {
      const auto kind = parse_centrality(name);
      if (!kind) fail("unknown centrality measure '" + name + "'");
      c.measures.push_back(*kind);
    }
  }
  if (o.n_max) c.n_max = *o.n_max;
  if (o.truncation) c.truncation = *o.truncation;
  if (o.theta) c.theta = *o.theta;
  if (o.seed) c.seed = *o.seed;
  if (o.parallelism) c.parallelism = *o.parallelism;
  if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
  if (!o.output_dir.empty()) c.output_dir = o.output_dir;
  if (c.corpus_path.empty()) fail("no corpus given (corpus.path or --corpus)");
  c.validate();
  return c;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"QA-network opinion mining pipeline", "qana"};
  app.require_subcommand(1);

  Overrides o;
  bool force = false;
  auto* run = app.add_subcommand("run", "Run every stage");
  add_pipeline_options(*run, o);

  auto* stage = app.add_subcommand("stage", "Run one stage");
  std::string stage_name;
  stage->add_option("name", stage_name, "ingest|qgen|embed|network|centrality|kpm|kpg")
      ->required();
  stage->add_flag("--force", force, "Recompute even if the stage is complete");
  add_pipeline_options(*stage, o);

  auto* validate = app.add_subcommand("validate", "Check a corpus");
  add_pipeline_options(*validate, o);

  auto* report = app.add_subcommand("report", "Collect run reports into grid CSVs");
  std::string runs_dir = "runs";
  std::string out_dir;
  report->add_option("--runs", runs_dir, "Directory holding runs");
  report->add_option("--out", out_dir, "Where grid CSVs go (default: --runs)");

  // CLI11 wants argv order reversed.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (*report) return cmd_report(runs_dir, out_dir.empty() ? runs_dir : out_dir, out, err);

  PipelineConfig config;
  try {
    if (*validate) {
      config = o.config.empty() ? PipelineConfig{} : load_config(o.config);
      if (!o.corpus.empty()) config.corpus_path = o.corpus;
      if (!o.format.empty()) {
        const auto f = parse_corpus_format(o.format);
        if (!f) throw Error(ErrorCode::config_error, "unknown corpus format '" + o.format + "'");
        config.corpus_format = *f;
      }
      if (!o.split.empty()) config.corpus_split = o.split;
      if (config.corpus_path.empty()) {
        throw Error(ErrorCode::config_error, "no corpus given (corpus.path or --corpus)");
      }
    } else {
      config = resolve(o);
    }
  } catch (const Error& e) {
    err << "usage error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitUsage;
  }

  if (*validate) {
    return cmd_validate(config.corpus_path, config.corpus_format, config.corpus_split, out, err);
  }
  if (*run) return cmd_run(config, out, err);

  const auto which = parse_stage(stage_name);
  if (!which) {
    err << "usage error: unknown stage '" << stage_name << "'\n";
    return kExitUsage;
  }
  return cmd_stage(*which, config, force, out, err);
}

}  // namespace qana
