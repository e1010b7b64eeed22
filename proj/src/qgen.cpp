#include "qana/qgen.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "qana/default_templates.hpp"
#include "qana/error.hpp"
#include "qana/hash.hpp"
#include "qana/parallel.hpp"
#include "qana/text.hpp"

namespace qana {

using nlohmann::json;

namespace {

constexpr std::string_view kArgumentSlot = "{argument}";
constexpr std::string_view kTopicSlot = "{topic}";
constexpr std::string_view kMaxSlot = "{max_questions}";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::string_view to_string(GenerationStyle style) {
  switch (style) {
    case GenerationStyle::closed: return "closed";
    case GenerationStyle::open: return "open";
    case GenerationStyle::hybrid: return "hybrid";
    case GenerationStyle::paraphrase: return "paraphrase";
    case GenerationStyle::original: return "original";
  }
  return "invalid";
}

std::optional<GenerationStyle> parse_style(std::string_view name) {
  for (auto s : {GenerationStyle::closed, GenerationStyle::open, GenerationStyle::hybrid,
                 GenerationStyle::paraphrase, GenerationStyle::original}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

PromptTemplate::PromptTemplate(GenerationStyle style, std::string version, std::string text,
                               int max_questions)
    : style_(style),
      version_(std::move(version)),
      text_(std::move(text)),
      max_questions_(max_questions) {
  if (count_occurrences(text_, kArgumentSlot) != 1 || count_occurrences(text_, kTopicSlot) != 1) {
    throw Error(ErrorCode::invalid_template,
                "template '" + version_ + "' must contain {argument} and {topic} exactly once");
  }
  if (max_questions_ < 1) {
    throw Error(ErrorCode::invalid_template, "max_questions must be positive");
  }
}

PromptTemplate default_template(GenerationStyle style, int max_questions) {
  if (style == GenerationStyle::original) {
    return PromptTemplate(style, "original.v1", "{topic}\n{argument}", 1);
  }
  for (const auto& entry : detail::kDefaultTemplates) {
    if (to_string(style) == entry.style) {
      return PromptTemplate(style, entry.version, entry.text, max_questions);
    }
  }
  throw Error(ErrorCode::invalid_template, "no default template for style");
}

PromptTemplate load_template(const std::filesystem::path& file, GenerationStyle style,
                             int max_questions) {
  return PromptTemplate(style, file.stem().string(), read_file(file), max_questions);
}

std::string render_prompt(const PromptTemplate& tmpl, const Argument& argument,
                          const Topic& topic) {
  const std::string& t = tmpl.text();
  std::string out;
  out.reserve(t.size() + argument.text.size() + topic.text.size());
  std::size_t i = 0;
  while (i < t.size()) {
    const std::string_view rest = std::string_view(t).substr(i);
    if (rest.starts_with(kArgumentSlot)) {
      out += argument.text;
      i += kArgumentSlot.size();
    } else if (rest.starts_with(kTopicSlot)) {
      out += topic.text;
      i += kTopicSlot.size();
    } else if (rest.starts_with(kMaxSlot)) {
      out += std::to_string(tmpl.max_questions());
      i += kMaxSlot.size();
    } else {
      out.push_back(t[i++]);
    }
  }
  return out;
}

std::vector<std::string> parse_generation(std::string_view raw, int max_questions) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= raw.size() && static_cast<int>(out.size()) < max_questions) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    std::string_view line = trim(raw.substr(pos, eol - pos));
    pos = eol + 1;

    std::size_t digits = 0;
    while (digits < line.size() && line[digits] >= '0' && line[digits] <= '9') ++digits;
    if (digits > 0 && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
      line = trim(line.substr(digits + 1));
    } else if (line.starts_with("-") || line.starts_with("*")) {
      line = trim(line.substr(1));
    } else if (line.starts_with("•")) {
      line = trim(line.substr(std::string_view("•").size()));
    }
    if (utf8_length(line) < 3) continue;
    out.emplace_back(line);
  }
  return out;
}

// ---------------------------------------------------------------------------

MockGenerationBackend::MockGenerationBackend(std::map<std::string, std::string> responses,
                                             Options options)
    : responses_(std::move(responses)), options_(options) {}

std::map<std::string, std::string> MockGenerationBackend::read_fixture(
    const std::filesystem::path& file) {
  const std::string content = read_file(file);
  std::map<std::string, std::string> responses;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string_view line = trim(std::string_view(content).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      responses[normalize_text(rec.at("key").get<std::string>())] =
          rec.at("response").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(file.filename().string(), line_no, 1, e.what());
    }
  }
  return responses;
}

MockGenerationBackend MockGenerationBackend::from_jsonl(const std::filesystem::path& file,
                                                        Options options) {
  return MockGenerationBackend(read_fixture(file), options);
}

void MockGenerationBackend::fail_when_contains(std::string needle) {
  failures_.push_back(std::move(needle));
}

std::string MockGenerationBackend::generate(const std::string& prompt) {
  ++calls_;
  for (const auto& f : failures_) {
    if (prompt.find(f) != std::string::npos) throw BackendError("", "injected failure");
  }
  if (const auto it = responses_.find(prompt); it != responses_.end()) return it->second;

  const std::string* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& [key, response] : responses_) {
    if (key.size() > best_len && prompt.find(key) != std::string::npos) {
      best = &response;
      best_len = key.size();
    }
  }
  if (best != nullptr) return *best;

  if (!options_.synthesize_missing) {
    throw BackendError("", "no fixture response for prompt");
  }
  std::uint64_t state = hash64(prompt) ^ options_.seed;
  std::string out;
  for (int i = 0; i < options_.synthesized_count; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d. Synthetic question %016llx?\n", i + 1,
                  static_cast<unsigned long long>(splitmix64(state)));
    out += buf;
  }
  return out;
}

ChatCompletionsBackend::ChatCompletionsBackend(http::Endpoint endpoint, std::string model,
                                               double temperature)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), temperature_(temperature) {}

std::string ChatCompletionsBackend::generate(const std::string& prompt) {
  const json request = {
      {"model", model_},
      {"temperature", temperature_},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  const std::string body = http::post_json(endpoint_, "/chat/completions", request.dump());
  try {
    const json response = json::parse(body);
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError("", std::string("malformed chat-completions response: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Question> make_questions(const Argument& argument, GenerationStyle style,
                                     const std::string& generator,
                                     const std::vector<std::string>& texts) {
  std::vector<Question> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back({argument.id + "#" + std::string(to_string(style)) + "-" + std::to_string(i + 1),
                   argument.id, style, texts[i], generator});
  }
  return out;
}

std::vector<std::string> generate_texts(const Argument& argument, const Topic& topic,
                                        GenerationBackend& backend, const PromptTemplate& tmpl,
                                        const RetryPolicy& retry) {
  const std::string prompt = render_prompt(tmpl, argument, topic);
  auto backoff = retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      auto texts = parse_generation(backend.generate(prompt), tmpl.max_questions());
      if (texts.empty()) {
        throw Error(ErrorCode::empty_generation,
                    argument.id + ": backend returned no parseable question");
      }
      return texts;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::backend_error && e.code() != ErrorCode::empty_generation) throw;
      if (attempt >= retry.max_retries) {
        if (e.code() == ErrorCode::backend_error) throw BackendError(argument.id, e.what());
        throw;
      }
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(backoff.count()) * retry.backoff_multiplier));
  }
}

}  // namespace

std::vector<Question> generate_questions(const Argument& argument, const Topic& topic,
                                         GenerationStyle style, GenerationBackend& backend,
                                         const PromptTemplate& tmpl, const RetryPolicy& retry) {
  if (style == GenerationStyle::original) {
    return make_questions(argument, style, "identity", {argument.text});
  }
  return make_questions(argument, style, backend.identifier(),
                        generate_texts(argument, topic, backend, tmpl, retry));
}

// ---------------------------------------------------------------------------

QuestionCache::QuestionCache(std::filesystem::path file) : file_(std::move(file)) {
  if (!std::filesystem::exists(file_)) return;
  const std::string content = read_file(file_);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string_view line = trim(std::string_view(content).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      entries_[rec.at("key").get<std::string>()] =
          rec.at("questions").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ParseError(file_.filename().string(), line_no, 1, e.what());
    }
  }
}

std::string QuestionCache::key(std::string_view backend_id, std::string_view template_version,
                               GenerationStyle style, std::string_view argument_text) {
  return fields_digest({backend_id, template_version, to_string(style), argument_text});
}

std::optional<std::vector<std::string>> QuestionCache::lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void QuestionCache::store(const std::string& key, std::vector<std::string> texts) {
  std::lock_guard lock(mu_);
  entries_[key] = std::move(texts);
}

void QuestionCache::save() const {
  if (file_.empty()) return;
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& [key, texts] : entries_) {
    out += json{{"key", key}, {"questions", texts}}.dump() + "\n";
  }
  write_file(file_, out);
}

std::size_t QuestionCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

QuestionBatch generate_corpus_questions(const Corpus& corpus, GenerationStyle style,
                                        GenerationBackend& backend, const PromptTemplate& tmpl,
                                        QuestionCache* cache, const GenerationOptions& options) {
  std::vector<const Argument*> args;
  for (const auto& a : corpus.arguments()) args.push_back(&a);
  std::sort(args.begin(), args.end(),
            [](const Argument* a, const Argument* b) { return a->id < b->id; });

  struct Outcome {
    std::vector<Question> questions;
    std::optional<std::string> failure;
    std::exception_ptr error;
  };
  std::vector<Outcome> outcomes(args.size());

  parallel_for(args.size(), options.parallelism, [&](std::size_t i) {
    const Argument& arg = *args[i];
    Outcome& out = outcomes[i];
    if (style == GenerationStyle::original) {
      out.questions = generate_questions(arg, Topic{}, style, backend, tmpl);
      return;
    }
    const Topic* found = corpus.find_topic(arg.topic_id);
    const Topic topic = found ? *found : Topic{arg.topic_id, arg.topic_id};
    const std::string key =
        cache ? QuestionCache::key(backend.identifier(), tmpl.version(), style, arg.text) : "";
    if (cache) {
      if (auto hit = cache->lookup(key)) {
        out.questions = make_questions(arg, style, backend.identifier(), *hit);
        return;
      }
    }
    try {
      auto texts = generate_texts(arg, topic, backend, tmpl, options.retry);
      if (cache) cache->store(key, texts);
      out.questions = make_questions(arg, style, backend.identifier(), texts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::backend_error && e.code() != ErrorCode::empty_generation) throw;
      out.failure = e.what();
      out.error = std::current_exception();
    }
  });

  QuestionBatch batch;
  for (std::size_t i = 0; i < args.size(); ++i) {
    Outcome& out = outcomes[i];
    if (out.failure) {
      if (options.on_failure == FailurePolicy::abort) {
        try {
          std::rethrow_exception(out.error);
        } catch (const BackendError&) {
          throw;
        } catch (const Error& e) {
          throw BackendError(args[i]->id, e.what());
        }
      }
      batch.skips.push_back({args[i]->id, *out.failure});
      continue;
    }
    for (auto& q : out.questions) batch.questions.push_back(std::move(q));
  }
  return batch;
}

std::string questions_to_jsonl(std::span<const Question> questions) {
  std::string out;
  for (const auto& q : questions) {
    out += json{{"q_id", q.id},
                {"source_arg_id", q.source_arg_id},
                {"style", to_string(q.style)},
                {"text", q.text},
                {"generator", q.generator}}
               .dump() +
           "\n";
  }
  return out;
}

std::vector<Question> load_questions(const std::filesystem::path& file) {
  const std::string content = read_file(file);
  std::vector<Question> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string_view line = trim(std::string_view(content).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const auto style = parse_style(rec.at("style").get<std::string>());
      if (!style) throw ParseError(file.filename().string(), line_no, 1, "unknown style");
      out.push_back({rec.at("q_id").get<std::string>(), rec.at("source_arg_id").get<std::string>(),
                     *style, rec.at("text").get<std::string>(),
                     rec.at("generator").get<std::string>()});
    } catch (const json::exception& e) {
      throw ParseError(file.filename().string(), line_no, 1, e.what());
    }
  }
  return out;
}

}  // namespace qana
