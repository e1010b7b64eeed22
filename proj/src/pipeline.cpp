#include "qana/pipeline.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <atomic>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <set>

#include "qana/centrality.hpp"
#include "qana/corpus.hpp"
#include "qana/embed.hpp"
#include "qana/error.hpp"
#include "qana/hash.hpp"
#include "qana/kpg_eval.hpp"
#include "qana/kpm_eval.hpp"
#include "qana/network.hpp"
#include "qana/qgen.hpp"
#include "qana/report.hpp"
#include "qana/text.hpp"

namespace qana {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array kStages{Stage::ingest,     Stage::qgen, Stage::embed, Stage::network,
                             Stage::centrality, Stage::kpm,  Stage::kpg};

std::vector<Stage> upstream_of(Stage stage) {
  switch (stage) {
    case Stage::ingest: return {};
    case Stage::qgen: return {Stage::ingest};
    case Stage::embed: return {Stage::ingest, Stage::qgen};
    case Stage::network: return {Stage::ingest, Stage::qgen, Stage::embed};
    case Stage::centrality: return {Stage::network};
    case Stage::kpm: return {Stage::ingest, Stage::qgen, Stage::embed};
    case Stage::kpg: return {Stage::ingest, Stage::embed, Stage::network};
  }
  return {};
}

// Counts calls that reach the wrapped backend.
class CountingGenerator : public GenerationBackend {
 public:
  explicit CountingGenerator(GenerationBackend& inner) : inner_(inner) {}
  std::string identifier() const override { return inner_.identifier(); }
  std::string generate(const std::string& prompt) override {
    ++calls_;
    return inner_.generate(prompt);
  }
  std::size_t calls() const { return calls_.load(); }

 private:
  GenerationBackend& inner_;
  std::atomic<std::size_t> calls_{0};
};

class CountingEmbedder : public EmbeddingBackend {
 public:
  explicit CountingEmbedder(EmbeddingBackend& inner) : inner_(inner) {}
  std::string identifier() const override { return inner_.identifier(); }
  std::size_t max_chars() const override { return inner_.max_chars(); }
  std::vector<Eigen::VectorXd> embed_batch(std::span<const std::string> texts) override {
    texts_ += texts.size();
    return inner_.embed_batch(texts);
  }
  std::size_t texts() const { return texts_.load(); }

 private:
  EmbeddingBackend& inner_;
  std::atomic<std::size_t> texts_{0};
};

std::string generator_id(const PipelineConfig& c) {
  if (c.style == GenerationStyle::original) return "identity";
  return c.generator == "mock" ? "mock-generator" : c.generator_model;
}

std::string embedding_id(const PipelineConfig& c) {
  if (c.embedding == "mock") return MockEmbeddingBackend(c.embedding_dim, c.seed).identifier();
  return c.embedding_model;
}

PromptTemplate make_template(const PipelineConfig& c) {
  if (c.template_file.empty()) return default_template(c.style, c.max_questions);
  return load_template(c.template_file, c.style, c.max_questions);
}

std::string file_digest(const fs::path& file) {
  if (file.empty() || !fs::exists(file)) return {};
  return sha256_hex(read_file(file));
}

std::string measures_text(const PipelineConfig& c) {
  std::string out;
  for (auto kind : c.measures) {
    if (!out.empty()) out += ",";
    out += to_string(kind);
  }
  return out;
}

std::string timestamp(const PipelineConfig& c) {
  return iso8601_utc(c.source_date_epoch ? *c.source_date_epoch
                                         : static_cast<std::int64_t>(std::time(nullptr)));
}

json slice_to_json(const SliceKey& key) {
  return {{"topic", key.topic_id}, {"stance", std::string(to_string(key.stance))}};
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::qgen: return "qgen";
    case Stage::embed: return "embed";
    case Stage::network: return "network";
    case Stage::centrality: return "centrality";
    case Stage::kpm: return "kpm";
    case Stage::kpg: return "kpg";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (auto s : kStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

struct Pipeline::Impl {
  PipelineConfig config;
  std::ostream& log;
  Corpus source;
  std::string corpus_hash;
  PromptTemplate tmpl;
  fs::path run_dir;
  std::string run_id;

  std::unique_ptr<GenerationBackend> generator;
  std::unique_ptr<CountingGenerator> counting_generator;
  std::unique_ptr<EmbeddingBackend> embedder;
  std::unique_ptr<CountingEmbedder> counting_embedder;

  Impl(PipelineConfig cfg, std::ostream& out)
      : config(std::move(cfg)), log(out), tmpl(make_template(config)) {}

  ConfigFingerprint fingerprint() const {
    return {corpus_hash, std::string(to_string(config.style)), generator_id(config),
            embedding_id(config), config.policy.describe()};
  }

  fs::path marker(Stage s) const { return run_dir / ".done" / std::string(to_string(s)); }
  fs::path artifact(std::string_view name) const { return run_dir / std::string(name); }

  CountingGenerator& generation_backend() {
    if (!counting_generator) {
      if (config.generator == "mock") {
        MockGenerationBackend::Options opts{config.mock_synthesize, config.max_questions,
                                            config.seed};
        if (config.generator_fixture.empty()) {
          generator = std::make_unique<MockGenerationBackend>(
              std::map<std::string, std::string>{}, opts);
        } else {
          generator = std::make_unique<MockGenerationBackend>(
              MockGenerationBackend::read_fixture(config.generator_fixture), opts);
        }
      } else {
        http::Endpoint ep{config.generator_url,
                          http::api_key_from_env(config.generator_api_key_env)};
        generator = std::make_unique<ChatCompletionsBackend>(ep, config.generator_model);
      }
      counting_generator = std::make_unique<CountingGenerator>(*generator);
    }
    return *counting_generator;
  }

  CountingEmbedder& embedding_backend() {
    if (!counting_embedder) {
      if (config.embedding == "mock") {
        embedder = std::make_unique<MockEmbeddingBackend>(config.embedding_dim, config.seed,
                                                          config.embedding_max_chars);
      } else {
        http::Endpoint ep{config.embedding_url,
                          http::api_key_from_env(config.embedding_api_key_env)};
        embedder = std::make_unique<HttpEmbeddingBackend>(ep, config.embedding_model,
                                                          config.embedding_max_chars);
      }
      counting_embedder = std::make_unique<CountingEmbedder>(*embedder);
    }
    return *counting_embedder;
  }

  // Everything that can change a stage output, and nothing that cannot.
  std::string canonical_config() const {
    json j{{"corpus_hash", corpus_hash},
           {"style", to_string(config.style)},
           {"generator", generator_id(config)},
           {"generator_fixture", file_digest(config.generator_fixture)},
           {"mock_synthesize", config.mock_synthesize},
           {"template_version", tmpl.version()},
           {"template", sha256_hex(tmpl.text())},
           {"max_questions", config.max_questions},
           {"embedding", embedding_id(config)},
           {"embedding_max_chars", config.embedding_max_chars},
           {"policy", config.policy.describe()},
           {"measures", measures_text(config)},
           {"damping", config.pagerank.damping},
           {"tolerance", config.pagerank.tolerance},
           {"max_iters", config.pagerank.max_iters},
           {"weighted_degree", config.weighted_degree},
           {"n_max", config.n_max},
           {"truncation", config.truncation},
           {"theta", config.theta ? json(*config.theta) : json(nullptr)},
           {"threshold_rule", config.threshold_rule == ThresholdRule::youden ? "youden"
                                                                              : "closest_to_corner"},
           {"seed", config.seed}};
    return j.dump();
  }

  void require(Stage stage) const {
    for (auto up : upstream_of(stage)) {
      if (!fs::exists(marker(up))) {
        throw Error(ErrorCode::missing_upstream,
                    std::string(to_string(stage)) + " needs the output of stage '" +
                        std::string(to_string(up)) + "' in " + run_dir.string());
      }
    }
  }

  Corpus run_corpus() const { return load_corpus(artifact("corpus.jsonl"), CorpusFormat::jsonl); }
  std::vector<Question> run_questions() const { return load_questions(artifact("questions.jsonl")); }

  // Ids of every embedded node, sorted: questions, arguments and key points.
  std::vector<std::pair<std::string, std::string>> embedding_inputs(
      const Corpus& corpus, const std::vector<Question>& questions) const {
    std::map<std::string, std::string> texts;
    auto add = [&](const std::string& id, const std::string& text) {
      auto [it, inserted] = texts.emplace(id, text);
      if (!inserted && it->second != text) {
        throw Error(ErrorCode::integrity_error, "node id '" + id + "' names two different texts");
      }
    };
    for (const auto& q : questions) add(q.id, q.text);
    for (const auto& a : corpus.arguments()) add(a.id, a.text);
    for (const auto& k : corpus.key_points()) add(k.id, k.text);
    return {texts.begin(), texts.end()};
  }

  EmbeddingTable run_embeddings(const Corpus& corpus,
                                const std::vector<Question>& questions) const {
    EmbeddingCache stored(artifact("embeddings"));
    EmbeddingTable table;
    for (const auto& [id, text] : embedding_inputs(corpus, questions)) {
      auto hit = stored.find(id);
      if (!hit) throw Error(ErrorCode::missing_embedding, "no stored embedding for '" + id + "'");
      table.insert(id, std::move(*hit));
    }
    return table;
  }

  std::vector<SliceNetwork> run_networks() const {
    json doc;
    try {
      doc = json::parse(read_file(artifact("networks.json")));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::format_error, std::string("networks.json: ") + e.what());
    }
    std::vector<SliceNetwork> out;
    try {
      for (const auto& s : doc.at("slices")) {
        out.push_back({{s.at("topic").get<std::string>(),
                        parse_stance(s.at("stance").get<std::string>())},
                       deserialize_network(s.at("network").dump())});
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::format_error, std::string("networks.json: ") + e.what());
    }
    return out;
  }

  void write_manifest() const {
    RunManifest m;
    m.run_id = run_id;
    m.corpus_hash = corpus_hash;
    m.style = std::string(to_string(config.style));
    m.generator = generator_id(config);
    m.embedding = embedding_id(config);
    m.policy = config.policy.describe();
    for (auto k : config.measures) m.measures.emplace_back(to_string(k));
    m.template_version = tmpl.version();
    m.n_max = config.n_max;
    m.truncation = config.truncation;
    m.seed = config.seed;
    m.started_at = timestamp(config);
    m.versions = {{"qana", "0.1.0"},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"template", tmpl.version()},
                  {"network_format", "qana-network/1"}};
    write_file(artifact("manifest.json"), to_json(m).dump(2) + "\n");
  }

  void ingest() {
    write_file(artifact("corpus.jsonl"), to_jsonl(source));
    write_manifest();
    log << "[ingest] " << source.topics().size() << " topics, " << source.arguments().size()
        << " arguments, " << source.key_points().size() << " key points, "
        << source.annotations().size() << " annotations\n";
  }

  void qgen() {
    const Corpus corpus = run_corpus();
    QuestionCache cache(config.cache_dir / "questions.jsonl");
    GenerationOptions opts;
    opts.retry.max_retries = config.retries;
    opts.retry.initial_backoff = std::chrono::milliseconds(config.backoff_ms);
    opts.parallelism = config.parallelism;
    QuestionBatch batch;
    if (config.style == GenerationStyle::original) {
      // Never consults a backend, so no credentials are needed.
      MockGenerationBackend unused;
      batch = generate_corpus_questions(corpus, config.style, unused, tmpl, nullptr, opts);
    } else {
      batch = generate_corpus_questions(corpus, config.style, generation_backend(), tmpl, &cache,
                                        opts);
      cache.save();
    }
    write_file(artifact("questions.jsonl"), questions_to_jsonl(batch.questions));
    std::string skips;
    for (const auto& s : batch.skips) {
      skips += json{{"arg_id", s.arg_id}, {"reason", s.reason}}.dump() + "\n";
    }
    write_file(artifact("skips.jsonl"), skips);
    log << "[qgen] " << batch.questions.size() << " questions, " << batch.skips.size()
        << " arguments skipped\n";
  }

  void embed() {
    const Corpus corpus = run_corpus();
    const auto questions = run_questions();
    const auto inputs = embedding_inputs(corpus, questions);
    std::vector<std::string> texts;
    texts.reserve(inputs.size());
    for (const auto& [id, text] : inputs) texts.push_back(text);

    EmbeddingCache global(config.cache_dir / "embeddings");
    auto& backend = embedding_backend();
    const std::size_t before = backend.texts();
    const auto vectors =
        embed_texts(texts, backend, &global, {config.embedding_batch, config.parallelism});

    fs::remove_all(artifact("embeddings"));
    EmbeddingCache stored(artifact("embeddings"));
    std::size_t truncated = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      stored.insert(inputs[i].first, vectors[i]);
      if (vectors[i].truncated) ++truncated;
    }
    log << "[embed] " << inputs.size() << " nodes, " << backend.texts() - before
        << " sent to the backend, " << truncated << " truncated\n";
  }

  void network() {
    const Corpus corpus = run_corpus();
    const auto questions = run_questions();
    const auto table = run_embeddings(corpus, questions);
    const std::string created = timestamp(config);

    json slices = json::array();
    std::size_t edges = 0;
    for (const auto& key : corpus.slice_keys()) {
      std::vector<Argument> args;
      std::set<std::string> ids;
      for (const auto& a : corpus.arguments()) {
        if (a.topic_id == key.topic_id && a.stance == key.stance) {
          args.push_back(a);
          ids.insert(a.id);
        }
      }
      std::vector<Question> qs;
      for (const auto& q : questions) {
        if (ids.contains(q.source_arg_id)) qs.push_back(q);
      }
      const QaNetwork net =
          build_network(qs, args, table, config.policy, {created, config.parallelism});
      edges += net.edges().size();
      json s = slice_to_json(key);
      s["network"] = json::parse(serialize_network(net));
      slices.push_back(std::move(s));
    }
    write_file(artifact("networks.json"),
               json{{"format", "qana-networks/1"}, {"slices", slices}}.dump() + "\n");
    log << "[network] " << slices.size() << " slice networks, " << edges << " edges\n";
  }

  CentralityMeasure measure(CentralityKind kind) const {
    CentralityMeasure m;
    m.kind = kind;
    m.pagerank = config.pagerank;
    m.weighted_degree = config.weighted_degree;
    return m;
  }

  void centrality() {
    const auto networks = run_networks();
    std::vector<SliceScores> all;
    std::size_t unconverged = 0;
    for (const auto& sn : networks) {
      SliceScores s{sn.slice, &sn.network, {}};
      if (sn.network.node_count() > 0) {
        for (auto kind : config.measures) {
          s.scores.push_back(compute_centrality(sn.network, measure(kind), config.parallelism));
          if (!s.scores.back().converged) ++unconverged;
        }
      }
      all.push_back(std::move(s));
    }
    write_file(artifact("centrality_scores.csv"), render_centrality_scores(all));
    log << "[centrality] " << config.measures.size() << " measures over " << networks.size()
        << " networks";
    if (unconverged > 0) log << ", " << unconverged << " PageRank runs hit max_iters";
    log << "\n";
  }

  void kpm() {
    const Corpus corpus = run_corpus();
    const auto questions = run_questions();
    const auto table = run_embeddings(corpus, questions);
    const KpmReport report =
        evaluate_kpm(corpus, questions, table, {config.truncation}, fingerprint());
    json j = to_json(report);
    j["run_id"] = run_id;
    write_file(artifact("kpm.json"), j.dump(2) + "\n");
    write_file(artifact("kpm.csv"), render_plot_data(report));
    log << "[kpm] mAP " << format_number(report.overall_map) << " over "
        << report.per_slice.size() << " slices (" << report.excluded.size() << " excluded)\n";
  }

  void kpg() {
    const Corpus corpus = run_corpus();
    const auto questions = run_questions();
    const auto table = run_embeddings(corpus, questions);
    const auto networks = run_networks();

    Threshold threshold;
    if (config.theta) {
      threshold = {*config.theta, 0.0, 0.0, "override"};
    } else {
      threshold = select_threshold(threshold_pairs(corpus, table), config.threshold_rule,
                                   embedding_id(config));
    }
    write_file(artifact("threshold.json"),
               json{{"theta", threshold.theta},
                    {"tpr", threshold.tpr},
                    {"fpr", threshold.fpr},
                    {"source", threshold.source}}
                       .dump(2) +
                   "\n");

    std::vector<KpgReport> reports;
    json arr = json::array();
    for (auto kind : config.measures) {
      reports.push_back(evaluate_kpg(corpus, networks, measure(kind), table, threshold,
                                     config.n_max, fingerprint(), config.parallelism));
      json j = to_json(reports.back());
      j["run_id"] = run_id;
      arr.push_back(std::move(j));
    }
    write_file(artifact("kpg.json"), arr.dump(2) + "\n");
    write_file(artifact("kpg_curves.csv"), render_plot_data(reports));
    log << "[kpg] theta " << format_number(threshold.theta);
    for (const auto& r : reports) {
      log << ", " << r.measure.name() << " Coverage@" << r.n_max << " "
          << (r.curve.empty() ? std::string("n/a") : format_number(r.curve.back()));
    }
    log << "\n";
  }

  void execute(Stage stage) {
    switch (stage) {
      case Stage::ingest: ingest(); break;
      case Stage::qgen: qgen(); break;
      case Stage::embed: embed(); break;
      case Stage::network: network(); break;
      case Stage::centrality: centrality(); break;
      case Stage::kpm: kpm(); break;
      case Stage::kpg: kpg(); break;
    }
  }
};

Pipeline::Pipeline(PipelineConfig config, std::ostream& log) {
  config.validate();
  impl_ = std::make_unique<Impl>(std::move(config), log);
  impl_->source = load_corpus(impl_->config.corpus_path, impl_->config.corpus_format,
                              impl_->config.corpus_split);
  impl_->corpus_hash = corpus_hash(impl_->source);
  run_id_ = sha256_hex(impl_->canonical_config()).substr(0, 12);
  run_dir_ = impl_->config.output_dir / run_id_;
  impl_->run_id = run_id_;
  impl_->run_dir = run_dir_;
}

Pipeline::~Pipeline() = default;

bool Pipeline::run_stage(Stage stage, bool force) {
  Impl& p = *impl_;
  if (!force && fs::exists(p.marker(stage))) {
    p.log << "[" << to_string(stage) << "] already complete in " << run_dir_.string()
          << "; pass --force to recompute\n";
    return false;
  }
  p.require(stage);
  // Downstream outputs become stale once this stage reruns.
  bool after = false;
  for (auto s : kStages) {
    if (after) fs::remove(p.marker(s));
    if (s == stage) after = true;
  }
  fs::remove(p.marker(stage));
  p.execute(stage);
  write_file(p.marker(stage), std::string(to_string(stage)) + "\n");
  return true;
}

void Pipeline::run() {
  for (auto s : kStages) run_stage(s, true);
}

std::size_t Pipeline::generation_calls() const {
  return impl_->counting_generator ? impl_->counting_generator->calls() : 0;
}

std::size_t Pipeline::embedded_texts() const {
  return impl_->counting_embedder ? impl_->counting_embedder->texts() : 0;
}

namespace {

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::config_error || code == ErrorCode::invalid_argument ? kExitUsage
                                                                                : kExitRuntime;
}

void report_error(std::ostream& err, std::string_view stage, const Error& e) {
  err << "error: stage=" << stage << " code=" << to_string(e.code()) << " message=" << e.what()
      << "\n";
}

template <typename Fn>
int guarded(std::ostream& err, std::string_view& stage, Fn&& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const Error& e) {
    report_error(err, stage, e);
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: stage=" << stage << " code=Internal message=" << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int cmd_run(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  std::string_view stage = "setup";
  return guarded(err, stage, [&] {
    Pipeline pipeline(config, out);
    stage = "ingest";
    for (auto s : kStages) {
      stage = to_string(s);
      pipeline.run_stage(s, true);
    }
    out << "run " << pipeline.run_id() << " complete: " << pipeline.run_dir().string() << "\n";
  });
}

int cmd_stage(Stage which, const PipelineConfig& config, bool force, std::ostream& out,
              std::ostream& err) {
  std::string_view stage = "setup";
  return guarded(err, stage, [&] {
    Pipeline pipeline(config, out);
    stage = to_string(which);
    pipeline.run_stage(which, force);
  });
}

int cmd_validate(const fs::path& corpus, CorpusFormat format, std::string_view split,
                 std::ostream& out, std::ostream& err) {
  std::string_view stage = "validate";
  return guarded(err, stage, [&] {
    const Corpus c = load_corpus(corpus, format, split);
    std::size_t undecided = 0;
    for (const auto& a : c.annotations()) {
      if (a.label == Label::undecided) ++undecided;
    }
    out << "ok: " << c.topics().size() << " topics, " << c.arguments().size() << " arguments, "
        << c.key_points().size() << " key points, " << c.annotations().size() << " annotations ("
        << undecided << " undecided)\n"
        << "corpus hash " << corpus_hash(c) << "\n";
  });
}

int cmd_report(const fs::path& runs_dir, const fs::path& out_dir, std::ostream& out,
               std::ostream& err) {
  std::string_view stage = "report";
  return guarded(err, stage, [&] {
    const fs::path& root = runs_dir;
    if (!fs::is_directory(root)) {
      throw Error(ErrorCode::missing_file, "no run directory at " + runs_dir.string());
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<EvalReport> reports;
    for (const auto& dir : dirs) {
      if (fs::exists(dir / "kpm.json")) {
        reports.emplace_back(kpm_report_from_json(json::parse(read_file(dir / "kpm.json"))));
      }
      if (fs::exists(dir / "kpg.json")) {
        for (const auto& j : json::parse(read_file(dir / "kpg.json"))) {
          reports.emplace_back(kpg_report_from_json(j));
        }
      }
    }
    const GridFiles files = emit_grid_report(reports, out_dir);
    out << reports.size() << " reports from " << dirs.size() << " runs -> "
        << files.kpm_csv.string() << ", " << files.kpg_csv.string() << "\n";
  });
}

}  // namespace qana
