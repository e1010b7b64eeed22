#include "qana/http.hpp"

#include <httplib.h>

#include <atomic>
#include <cstdlib>

#include "qana/error.hpp"

namespace qana::http {
namespace {

std::atomic<std::size_t> g_requests{0};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::config_error, "endpoint URL lacks a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

}  // namespace

std::string api_key_from_env(const std::string& env_var) {
  const char* value = std::getenv(env_var.c_str());
  if (value == nullptr || *value == '\0') {
    throw Error(ErrorCode::config_error, "environment variable " + env_var + " is not set");
  }
  return value;
}

std::string post_json(const Endpoint& endpoint, const std::string& path,
                      const std::string& body) {
  ++g_requests;
  const SplitUrl url = split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(endpoint.timeout);
  client.set_read_timeout(endpoint.timeout);
  client.set_write_timeout(endpoint.timeout);
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  }
  const auto res = client.Post(url.prefix + path, headers, body, "application/json");
  if (!res) {
    throw BackendError("", "request to " + endpoint.base_url + path +
                               " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError("", "HTTP " + std::to_string(res->status) + " from " +
                               endpoint.base_url + path + ": " + res->body.substr(0, 500));
  }
  return res->body;
}

std::size_t request_count() { return g_requests.load(); }

}  // namespace qana::http
