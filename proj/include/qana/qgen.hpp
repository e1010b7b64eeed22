#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qana/corpus.hpp"
#include "qana/http.hpp"

namespace qana {

enum class GenerationStyle { closed, open, hybrid, paraphrase, original };

std::string_view to_string(GenerationStyle style);
std::optional<GenerationStyle> parse_style(std::string_view name);

struct Question {
  std::string id;
  std::string source_arg_id;
  GenerationStyle style = GenerationStyle::closed;
  std::string text;
  std::string generator;
  friend bool operator==(const Question&, const Question&) = default;
};

/// Prompt text with exactly one `{argument}` and one `{topic}` placeholder.
/// An optional `{max_questions}` placeholder receives the question budget.
class PromptTemplate {
 public:
  /// Throws InvalidTemplate unless both placeholders occur exactly once and
  /// max_questions is positive.
  PromptTemplate(GenerationStyle style, std::string version, std::string text,
                 int max_questions = 5);

  GenerationStyle style() const { return style_; }
  const std::string& version() const { return version_; }
  const std::string& text() const { return text_; }
  int max_questions() const { return max_questions_; }

 private:
  GenerationStyle style_;
  std::string version_;
  std::string text_;
  int max_questions_;
};

/// Versioned template shipped under data/templates. Not defined for
/// GenerationStyle::original.
PromptTemplate default_template(GenerationStyle style, int max_questions = 5);

/// Reads a template file; the version is the file stem (e.g. "closed.v1").
PromptTemplate load_template(const std::filesystem::path& file, GenerationStyle style,
                             int max_questions = 5);

/// Single-pass substitution: inserted argument/topic text is never re-scanned,
/// so braces inside it survive literally.
std::string render_prompt(const PromptTemplate& tmpl, const Argument& argument,
                          const Topic& topic);

/// Splits raw model output into question lines: blank lines dropped, leading
/// enumeration ("1.", "2)", "-", "*", "•") stripped, lines shorter than three
/// characters dropped, at most `max_questions` kept.
std::vector<std::string> parse_generation(std::string_view raw, int max_questions);

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string identifier() const = 0;
  /// Must be safe to call concurrently.
  virtual std::string generate(const std::string& prompt) = 0;
};

/// Offline backend driven by a fixture map of key -> raw response. A prompt
/// resolves to the entry whose key equals it, else to the longest key that
/// occurs inside it. Unresolved prompts either get a synthesized response
/// (when enabled) or raise BackendError.
class MockGenerationBackend : public GenerationBackend {
 public:
  struct Options {
    bool synthesize_missing = false;
    int synthesized_count = 3;
    std::uint64_t seed = 0;
  };

  MockGenerationBackend(std::map<std::string, std::string> responses, Options options);
  explicit MockGenerationBackend(std::map<std::string, std::string> responses = {})
      : MockGenerationBackend(std::move(responses), Options{}) {}

  /// Reads `{"key": ..., "response": ...}` lines; keys are normalized.
  static std::map<std::string, std::string> read_fixture(const std::filesystem::path& file);
  static MockGenerationBackend from_jsonl(const std::filesystem::path& file, Options options);

  std::string identifier() const override { return "mock-generator"; }
  std::string generate(const std::string& prompt) override;

  /// Prompts containing `needle` fail with BackendError.
  void fail_when_contains(std::string needle);

  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, std::string> responses_;
  Options options_;
  std::vector<std::string> failures_;
  std::atomic<std::size_t> calls_{0};
};

/// OpenAI-compatible chat-completions client.
class ChatCompletionsBackend : public GenerationBackend {
 public:
  ChatCompletionsBackend(http::Endpoint endpoint, std::string model, double temperature = 0.0);

  std::string identifier() const override { return model_; }
  std::string generate(const std::string& prompt) override;

 private:
  http::Endpoint endpoint_;
  std::string model_;
  double temperature_;
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
};

/// Questions for one argument. Style `original` short-circuits to a single
/// question equal to the argument text without touching the backend.
/// Throws BackendError or EmptyGeneration once retries are exhausted.
std::vector<Question> generate_questions(const Argument& argument, const Topic& topic,
                                         GenerationStyle style, GenerationBackend& backend,
                                         const PromptTemplate& tmpl,
                                         const RetryPolicy& retry = {});

/// Thread-safe store of parsed generations, persisted as sorted JSONL.
class QuestionCache {
 public:
  QuestionCache() = default;
  /// Loads `file` if it exists; save() writes back to it.
  explicit QuestionCache(std::filesystem::path file);

  static std::string key(std::string_view backend_id, std::string_view template_version,
                         GenerationStyle style, std::string_view argument_text);

  std::optional<std::vector<std::string>> lookup(const std::string& key) const;
  void store(const std::string& key, std::vector<std::string> texts);
  void save() const;
  std::size_t size() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::string>> entries_;
};

enum class FailurePolicy { skip, abort };

struct GenerationOptions {
  RetryPolicy retry;
  FailurePolicy on_failure = FailurePolicy::skip;
  std::size_t parallelism = 1;
};

struct GenerationSkip {
  std::string arg_id;
  std::string reason;
};

struct QuestionBatch {
  std::vector<Question> questions;
  std::vector<GenerationSkip> skips;
};

/// Generates questions for every argument of `corpus`. Output is ordered by
/// arg_id, then generation index. With FailurePolicy::abort the first
/// failure (lowest arg_id) is rethrown as BackendError naming the argument.
QuestionBatch generate_corpus_questions(const Corpus& corpus, GenerationStyle style,
                                        GenerationBackend& backend, const PromptTemplate& tmpl,
                                        QuestionCache* cache,
                                        const GenerationOptions& options = {});

std::string questions_to_jsonl(std::span<const Question> questions);
std::vector<Question> load_questions(const std::filesystem::path& file);

}  // namespace qana
