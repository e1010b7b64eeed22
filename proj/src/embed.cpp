#include "qana/embed.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "qana/hash.hpp"
#include "qana/parallel.hpp"
#include "qana/text.hpp"

namespace qana {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "the embedding cache stores native little-endian doubles");

namespace {

void add_direction(Eigen::VectorXd& acc, std::uint64_t state, double scale) {
  for (Eigen::Index i = 0; i < acc.size(); ++i) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    acc[i] += scale * (2.0 * u - 1.0);
  }
}

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

bool is_valid_embedding(const Eigen::VectorXd& values) {
  return values.size() > 0 && values.allFinite() && values.norm() > 0.0;
}

Embedding mock_embedding(std::string_view text, int dim, std::uint64_t seed) {
  if (dim < 2) throw Error(ErrorCode::invalid_argument, "mock embedding dim must be >= 2");
  const std::string salt = std::to_string(seed) + "\x1f";
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);

  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    add_direction(v, hash64(salt + "tok\x1f" + token), 1.0);
    token.clear();
  };
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      token.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  add_direction(v, hash64(salt + "txt\x1f" + std::string(text)), 0.35);
  v /= v.norm();
  return Embedding{std::move(v), "mock-" + std::to_string(dim) + "-" + std::to_string(seed), false};
}

// ---------------------------------------------------------------------------

MockEmbeddingBackend::MockEmbeddingBackend(int dim, std::uint64_t seed, std::size_t max_chars)
    : dim_(dim), seed_(seed), max_chars_(max_chars) {
  if (dim < 2) throw Error(ErrorCode::invalid_argument, "mock embedding dim must be >= 2");
}

std::string MockEmbeddingBackend::identifier() const {
  return "mock-" + std::to_string(dim_) + "-" + std::to_string(seed_);
}

void MockEmbeddingBackend::poison(std::string text) { poisoned_.push_back(std::move(text)); }

std::vector<Eigen::VectorXd> MockEmbeddingBackend::embed_batch(
    std::span<const std::string> texts) {
  ++batches_;
  texts_ += texts.size();
  std::vector<Eigen::VectorXd> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    Eigen::VectorXd v = mock_embedding(t, dim_, seed_).values;
    if (std::find(poisoned_.begin(), poisoned_.end(), t) != poisoned_.end()) {
      v[0] = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(v));
  }
  return out;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(http::Endpoint endpoint, std::string model,
                                           std::size_t max_chars)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      max_chars_(max_chars > 0 ? max_chars : kHttpEmbeddingMaxChars) {}

std::vector<Eigen::VectorXd> HttpEmbeddingBackend::embed_batch(
    std::span<const std::string> texts) {
  const json request = {{"model", model_},
                        {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string body = http::post_json(endpoint_, "/embeddings", request.dump());
  std::vector<Eigen::VectorXd> out(texts.size());
  try {
    const json response = json::parse(body);
    const auto& data = response.at("data");
    if (data.size() != texts.size()) {
      throw BackendError("", "embeddings response has " + std::to_string(data.size()) +
                                 " vectors for " + std::to_string(texts.size()) + " inputs");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& item = data[i];
      const std::size_t index = item.contains("index") ? item.at("index").get<std::size_t>() : i;
      if (index >= out.size()) throw BackendError("", "embedding index out of range");
      const auto values = item.at("embedding").get<std::vector<double>>();
      out[index] = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                     static_cast<Eigen::Index>(values.size()));
    }
  } catch (const json::exception& e) {
    throw BackendError("", std::string("malformed embeddings response: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------

EmbeddingCache::EmbeddingCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  const fs::path bin = dir_ / "embeddings.bin";
  const fs::path index = dir_ / "embeddings.index.jsonl";
  if (!fs::exists(index) || !fs::exists(bin)) {
    // An orphaned data file cannot be interpreted; start both afresh.
    std::ofstream(bin, std::ios::binary | std::ios::trunc);
    std::ofstream(index, std::ios::trunc);
    return;
  }
  const std::string data = read_file(bin);
  bin_size_ = data.size();
  const std::string lines = read_file(index);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < lines.size()) {
    auto eol = lines.find('\n', pos);
    if (eol == std::string::npos) break;  // partial trailing record
    const std::string_view line = trim(std::string_view(lines).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(index.filename().string(), line_no, 1, e.what());
    }
    const auto offset = rec.at("offset").get<std::uint64_t>();
    const auto dim = rec.at("dim").get<std::uint64_t>();
    if (offset + dim * sizeof(double) > data.size()) continue;
    Embedding e;
    e.values.resize(static_cast<Eigen::Index>(dim));
    std::memcpy(e.values.data(), data.data() + offset, dim * sizeof(double));
    e.model = rec.at("model").get<std::string>();
    e.truncated = rec.value("truncated", false);
    entries_.emplace(rec.at("key").get<std::string>(), std::move(e));
  }
}

std::string EmbeddingCache::key(std::string_view backend_id, std::string_view text) {
  return fields_digest({backend_id, text});
}

std::optional<Embedding> EmbeddingCache::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::insert(const std::string& key, const Embedding& embedding) {
  std::lock_guard lock(mu_);
  if (!entries_.emplace(key, embedding).second) return;
  if (dir_.empty()) return;
  const auto bytes = static_cast<std::streamsize>(embedding.values.size() * sizeof(double));
  {
    std::ofstream bin(dir_ / "embeddings.bin", std::ios::binary | std::ios::app);
    bin.write(reinterpret_cast<const char*>(embedding.values.data()), bytes);
  }
  {
    std::ofstream index(dir_ / "embeddings.index.jsonl", std::ios::app);
    index << json{{"key", key},
                  {"model", embedding.model},
                  {"dim", embedding.values.size()},
                  {"offset", bin_size_},
                  {"truncated", embedding.truncated}}
                 .dump()
          << "\n";
  }
  bin_size_ += static_cast<std::uint64_t>(bytes);
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

std::vector<Embedding> embed_texts(std::span<const std::string> texts, EmbeddingBackend& backend,
                                   EmbeddingCache* cache, const EmbedOptions& options) {
  const std::string backend_id = backend.identifier();
  const std::size_t limit = backend.max_chars();

  std::vector<std::string> keys(texts.size());
  std::unordered_map<std::string, Embedding> resolved;
  std::vector<std::size_t> pending;  // first occurrence of each unresolved key
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = EmbeddingCache::key(backend_id, texts[i]);
    if (resolved.contains(keys[i])) continue;
    if (cache) {
      if (auto hit = cache->find(keys[i])) {
        resolved.emplace(keys[i], std::move(*hit));
        continue;
      }
    }
    resolved.emplace(keys[i], Embedding{});
    pending.push_back(i);
  }

  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  const std::size_t batches = (pending.size() + batch_size - 1) / batch_size;
  std::vector<std::vector<Embedding>> results(batches);

  parallel_for(batches, options.parallelism, [&](std::size_t b) {
    const std::size_t begin = b * batch_size;
    const std::size_t end = std::min(pending.size(), begin + batch_size);
    std::vector<std::string> inputs;
    std::vector<bool> truncated;
    for (std::size_t p = begin; p < end; ++p) {
      const std::string& t = texts[pending[p]];
      const std::string_view cut = limit > 0 ? utf8_truncate(t, limit) : std::string_view(t);
      inputs.emplace_back(cut);
      truncated.push_back(cut.size() != t.size());
    }
    const std::string subject = "batch " + std::to_string(b);
    std::vector<Eigen::VectorXd> vectors;
    try {
      vectors = backend.embed_batch(inputs);
    } catch (const BackendError& e) {
      throw BackendError(subject, e.what());
    }
    if (vectors.size() != inputs.size()) {
      throw BackendError(subject, "backend returned " + std::to_string(vectors.size()) +
                                      " vectors for " + std::to_string(inputs.size()) + " texts");
    }
    for (std::size_t j = 0; j < vectors.size(); ++j) {
      if (!is_valid_embedding(vectors[j])) {
        throw BackendError(subject, "non-finite or zero vector for text " +
                                        std::to_string(pending[begin + j]));
      }
      results[b].push_back(Embedding{std::move(vectors[j]), backend_id, truncated[j]});
    }
  });

  Eigen::Index dim = -1;
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t j = 0; j < results[b].size(); ++j) {
      Embedding& e = results[b][j];
      if (dim < 0) dim = e.dim();
      if (e.dim() != dim) {
        throw BackendError("batch " + std::to_string(b), "inconsistent embedding dimension");
      }
      const std::string& key = keys[pending[b * batch_size + j]];
      if (cache) cache->insert(key, e);
      resolved[key] = std::move(e);
    }
  }

  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& k : keys) out.push_back(resolved.at(k));
  return out;
}

// ---------------------------------------------------------------------------

void EmbeddingTable::insert(std::string id, Embedding embedding) {
  entries_.insert_or_assign(std::move(id), std::move(embedding));
}

bool EmbeddingTable::contains(std::string_view id) const {
  return entries_.find(id) != entries_.end();
}

const Embedding& EmbeddingTable::at(std::string_view id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw Error(ErrorCode::missing_embedding, "no embedding for '" + std::string(id) + "'");
  }
  return it->second;
}

}  // namespace qana
