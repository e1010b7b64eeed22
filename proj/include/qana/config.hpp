#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qana/centrality.hpp"
#include "qana/corpus.hpp"
#include "qana/kpg_eval.hpp"
#include "qana/network.hpp"
#include "qana/qgen.hpp"

namespace qana {

/// Minimal TOML-style key/value reader: `[section]` headers, `key = value`
/// pairs, `#` comments; values are strings ("..." or '...'), numbers,
/// booleans, or single-line arrays of those. Keys are addressed as
/// "section.key". Throws ParseError.
class KeyValueFile {
 public:
  struct Value {
    enum class Type { string, number, boolean, array } type = Type::string;
    std::string text;  // raw scalar text, or string contents
    double number = 0.0;
    bool boolean = false;
    std::vector<Value> items;
  };

  static KeyValueFile parse(std::string_view text, const std::string& source_name);

  bool contains(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, Value>& values() const { return values_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_string_list(const std::string& key) const;

 private:
  std::map<std::string, Value> values_;
};

struct PipelineConfig {
  // corpus
  std::filesystem::path corpus_path;
  CorpusFormat corpus_format = CorpusFormat::argkp_csv;
  std::string corpus_split;

  // generation
  GenerationStyle style = GenerationStyle::closed;
  std::string generator = "mock";  // mock | openai
  std::filesystem::path generator_fixture;
  bool mock_synthesize = false;
  std::string generator_model = "gpt-4-0125-preview";
  std::string generator_url = "https://api.openai.com/v1";
  std::string generator_api_key_env = "OPENAI_API_KEY";
  std::filesystem::path template_file;  // empty: built-in default
  int max_questions = 5;
  int retries = 2;
  int backoff_ms = 500;

  // embedding
  std::string embedding = "mock";  // mock | openai
  int embedding_dim = 64;
  std::string embedding_model = "text-embedding-3-large";
  std::string embedding_url = "https://api.openai.com/v1";
  std::string embedding_api_key_env = "OPENAI_API_KEY";
  std::size_t embedding_batch = 64;
  std::size_t embedding_max_chars = 0;

  // network / centrality / evaluation
  SparsificationPolicy policy = SparsificationPolicy::top_k(10);
  std::vector<CentralityKind> measures{CentralityKind::pagerank, CentralityKind::degree,
                                       CentralityKind::betweenness, CentralityKind::closeness};
  PageRankParams pagerank;
  bool weighted_degree = true;
  std::size_t n_max = 10;
  double truncation = 0.5;
  std::optional<double> theta;
  ThresholdRule threshold_rule = ThresholdRule::youden;

  // run
  std::filesystem::path cache_dir = ".qana-cache";
  std::filesystem::path output_dir = "runs";
  std::size_t parallelism = 1;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> source_date_epoch;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Reads a config file. Relative paths inside it resolve against the file's
/// directory. Unknown keys and invalid values throw ConfigError.
PipelineConfig load_config(const std::filesystem::path& file);
PipelineConfig config_from(const KeyValueFile& kv, const std::filesystem::path& base_dir);

}  // namespace qana
