#include "qana/config.hpp"

#include <cmath>
#include <set>

#include "qana/error.hpp"
#include "qana/text.hpp"

namespace qana {

namespace fs = std::filesystem;

namespace {

class ValueParser {
 public:
  ValueParser(std::string_view text, const std::string& source, std::size_t line)
      : text_(text), source_(source), line_(line) {}

  KeyValueFile::Value parse_all() {
    KeyValueFile::Value v = parse_value();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] != '#') fail("trailing characters after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, line_, pos_ + 1, what);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  KeyValueFile::Value parse_value() {
    skip_space();
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '"' || c == '\'') return parse_string(c);
    if (c == '[') return parse_array();
    return parse_bare();
  }

  KeyValueFile::Value parse_string(char quote) {
    KeyValueFile::Value v;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != quote) {
      char c = text_[pos_++];
      if (quote == '"' && c == '\\') {
        if (pos_ >= text_.size()) fail("dangling escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      v.text.push_back(c);
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }

  KeyValueFile::Value parse_array() {
    KeyValueFile::Value v;
    v.type = KeyValueFile::Value::Type::array;
    ++pos_;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) fail("unterminated array");
      if (text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      v.items.push_back(parse_value());
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
    }
  }

  KeyValueFile::Value parse_bare() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           text_[pos_] != '#' && text_[pos_] != ' ' && text_[pos_] != '\t') {
      ++pos_;
    }
    KeyValueFile::Value v;
    v.text = std::string(text_.substr(start, pos_ - start));
    if (v.text == "true" || v.text == "false") {
      v.type = KeyValueFile::Value::Type::boolean;
      v.boolean = v.text == "true";
      return v;
    }
    std::string digits;
    for (char c : v.text) {
      if (c != '_') digits.push_back(c);
    }
    try {
      std::size_t used = 0;
      v.number = std::stod(digits, &used);
      if (used != digits.size()) fail("invalid value '" + v.text + "'");
    } catch (const std::logic_error&) {
      fail("invalid value '" + v.text + "'");
    }
    v.type = KeyValueFile::Value::Type::number;
    return v;
  }

  std::string_view text_;
  const std::string& source_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text, const std::string& source_name) {
  KeyValueFile kv;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos) throw ParseError(source_name, line_no, 1, "unterminated section");
      section = std::string(trim(line.substr(1, close - 1)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source_name, line_no, 1, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(source_name, line_no, 1, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (kv.values_.contains(full)) {
      throw ParseError(source_name, line_no, 1, "duplicate key '" + full + "'");
    }
    ValueParser parser(line.substr(eq + 1), source_name, line_no);
    kv.values_.emplace(full, parser.parse_all());
  }
  return kv;
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.type != Value::Type::string) {
    throw Error(ErrorCode::config_error, "'" + key + "' must be a string");
  }
  return it->second.text;
}

std::optional<double> KeyValueFile::get_number(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.type != Value::Type::number) {
    throw Error(ErrorCode::config_error, "'" + key + "' must be a number");
  }
  return it->second.number;
}

std::optional<bool> KeyValueFile::get_bool(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.type != Value::Type::boolean) {
    throw Error(ErrorCode::config_error, "'" + key + "' must be true or false");
  }
  return it->second.boolean;
}

std::optional<std::vector<std::string>> KeyValueFile::get_string_list(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (it->second.type == Value::Type::string) return std::vector<std::string>{it->second.text};
  if (it->second.type != Value::Type::array) {
    throw Error(ErrorCode::config_error, "'" + key + "' must be a list of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : it->second.items) {
    if (item.type != Value::Type::string) {
      throw Error(ErrorCode::config_error, "'" + key + "' must be a list of strings");
    }
    out.push_back(item.text);
  }
  return out;
}

// ---------------------------------------------------------------------------

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::config_error, what); };
  if (corpus_path.empty()) fail("corpus.path is required");
  if (generator != "mock" && generator != "openai") fail("generation.backend must be mock or openai");
  if (embedding != "mock" && embedding != "openai") fail("embedding.backend must be mock or openai");
  if (max_questions < 1) fail("generation.max_questions must be positive");
  if (retries < 0) fail("generation.retries must be non-negative");
  if (embedding == "mock" && embedding_dim < 2) fail("embedding.dim must be at least 2");
  if (embedding_batch < 1) fail("embedding.batch_size must be positive");
  if (measures.empty()) fail("centrality.measures must not be empty");
  if (!(pagerank.damping > 0.0 && pagerank.damping < 1.0)) fail("centrality.damping must lie in (0, 1)");
  if (!(pagerank.tolerance > 0.0)) fail("centrality.tolerance must be positive");
  if (pagerank.max_iters < 1) fail("centrality.max_iters must be positive");
  if (n_max < 1) fail("evaluation.n_max must be positive");
  if (!(truncation > 0.0 && truncation <= 1.0)) fail("evaluation.truncation must lie in (0, 1]");
  if (theta && !(*theta >= -1.0 && *theta <= 1.0)) fail("evaluation.theta must lie in [-1, 1]");
  if (parallelism < 1) fail("run.parallelism must be positive");
}

PipelineConfig config_from(const KeyValueFile& kv, const fs::path& base_dir) {
  static const std::set<std::string> kKnown = {
      "corpus.path", "corpus.format", "corpus.split",
      "generation.style", "generation.backend", "generation.fixture", "generation.synthesize",
      "generation.model", "generation.url", "generation.api_key_env", "generation.template",
      "generation.max_questions", "generation.retries", "generation.backoff_ms",
      "embedding.backend", "embedding.dim", "embedding.model", "embedding.url",
      "embedding.api_key_env", "embedding.batch_size", "embedding.max_chars",
      "network.policy",
      "centrality.measures", "centrality.damping", "centrality.tolerance", "centrality.max_iters",
      "centrality.weighted_degree",
      "evaluation.n_max", "evaluation.truncation", "evaluation.theta", "evaluation.threshold_rule",
      "run.cache_dir", "run.output_dir", "run.parallelism", "run.seed", "run.source_date_epoch",
  };
  for (const auto& [key, value] : kv.values()) {
    if (!kKnown.contains(key)) throw Error(ErrorCode::config_error, "unknown config key '" + key + "'");
  }

  auto path = [&](const std::string& key) -> std::optional<fs::path> {
    const auto s = kv.get_string(key);
    if (!s) return std::nullopt;
    const fs::path p(*s);
    return p.is_absolute() ? p : (base_dir / p).lexically_normal();
  };
  auto integer = [&](const std::string& key) -> std::optional<long long> {
    const auto v = kv.get_number(key);
    if (!v) return std::nullopt;
    if (std::floor(*v) != *v) throw Error(ErrorCode::config_error, "'" + key + "' must be an integer");
    return static_cast<long long>(*v);
  };
  auto non_negative = [&](const std::string& key) -> std::optional<std::size_t> {
    const auto v = integer(key);
    if (!v) return std::nullopt;
    if (*v < 0) throw Error(ErrorCode::config_error, "'" + key + "' must be non-negative");
    return static_cast<std::size_t>(*v);
  };

  PipelineConfig c;
  if (auto p = path("corpus.path")) c.corpus_path = *p;
  if (auto s = kv.get_string("corpus.format")) {
    const auto f = parse_corpus_format(*s);
    if (!f) throw Error(ErrorCode::config_error, "unknown corpus format '" + *s + "'");
    c.corpus_format = *f;
  }
  if (auto s = kv.get_string("corpus.split")) c.corpus_split = *s;

  if (auto s = kv.get_string("generation.style")) {
    const auto style = parse_style(*s);
    if (!style) throw Error(ErrorCode::config_error, "unknown question style '" + *s + "'");
    c.style = *style;
  }
  if (auto s = kv.get_string("generation.backend")) c.generator = *s;
  if (auto p = path("generation.fixture")) c.generator_fixture = *p;
  if (auto b = kv.get_bool("generation.synthesize")) c.mock_synthesize = *b;
  if (auto s = kv.get_string("generation.model")) c.generator_model = *s;
  if (auto s = kv.get_string("generation.url")) c.generator_url = *s;
  if (auto s = kv.get_string("generation.api_key_env")) c.generator_api_key_env = *s;
  if (auto p = path("generation.template")) c.template_file = *p;
  if (auto v = integer("generation.max_questions")) c.max_questions = static_cast<int>(*v);
  if (auto v = integer("generation.retries")) c.retries = static_cast<int>(*v);
  if (auto v = integer("generation.backoff_ms")) c.backoff_ms = static_cast<int>(*v);

  if (auto s = kv.get_string("embedding.backend")) c.embedding = *s;
  if (auto v = integer("embedding.dim")) c.embedding_dim = static_cast<int>(*v);
  if (auto s = kv.get_string("embedding.model")) c.embedding_model = *s;
  if (auto s = kv.get_string("embedding.url")) c.embedding_url = *s;
  if (auto s = kv.get_string("embedding.api_key_env")) c.embedding_api_key_env = *s;
  if (auto v = non_negative("embedding.batch_size")) c.embedding_batch = *v;
  if (auto v = non_negative("embedding.max_chars")) c.embedding_max_chars = *v;

  if (auto s = kv.get_string("network.policy")) {
    try {
      c.policy = SparsificationPolicy::parse(*s);
    } catch (const Error& e) {
      throw Error(ErrorCode::config_error, e.what());
    }
  }

  if (auto list = kv.get_string_list("centrality.measures")) {
    c.measures.clear();
    for (const auto& name : *list) {
      const auto kind = parse_centrality(name);
      if (!kind) throw Error(ErrorCode::config_error, "unknown centrality measure '" + name + "'");
      c.measures.push_back(*kind);
    }
  }
  if (auto v = kv.get_number("centrality.damping")) c.pagerank.damping = *v;
  if (auto v = kv.get_number("centrality.tolerance")) c.pagerank.tolerance = *v;
  if (auto v = integer("centrality.max_iters")) c.pagerank.max_iters = static_cast<int>(*v);
  if (auto b = kv.get_bool("centrality.weighted_degree")) c.weighted_degree = *b;

  if (auto v = non_negative("evaluation.n_max")) c.n_max = *v;
  if (auto v = kv.get_number("evaluation.truncation")) c.truncation = *v;
  if (auto v = kv.get_number("evaluation.theta")) c.theta = *v;
  if (auto s = kv.get_string("evaluation.threshold_rule")) {
    if (*s == "youden") {
      c.threshold_rule = ThresholdRule::youden;
    } else if (*s == "closest_to_corner") {
      c.threshold_rule = ThresholdRule::closest_to_corner;
    } else {
      throw Error(ErrorCode::config_error, "unknown threshold rule '" + *s + "'");
    }
  }

  if (auto p = path("run.cache_dir")) c.cache_dir = *p;
  if (auto p = path("run.output_dir")) c.output_dir = *p;
  if (auto v = non_negative("run.parallelism")) c.parallelism = *v;
  if (auto v = non_negative("run.seed")) c.seed = *v;
  if (auto v = integer("run.source_date_epoch")) c.source_date_epoch = *v;
  return c;
}

PipelineConfig load_config(const fs::path& file) {
  const std::string text = read_file(file);
  const KeyValueFile kv = KeyValueFile::parse(text, file.filename().string());
  return config_from(kv, fs::absolute(file).parent_path());
}

}  // namespace qana
