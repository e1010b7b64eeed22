#pragma once

#include <chrono>
#include <cstddef>
#include <string>

namespace qana::http {

/// An OpenAI-style JSON API endpoint, e.g. "https://api.openai.com/v1".
struct Endpoint {
  std::string base_url;
  std::string api_key;
  std::chrono::seconds timeout{120};
};

/// Reads the API key from `env_var`; throws ConfigError when unset.
std::string api_key_from_env(const std::string& env_var);

/// POSTs `body` (JSON text) to base_url + path and returns the response body.
/// Transport failures and non-2xx statuses throw BackendError.
std::string post_json(const Endpoint& endpoint, const std::string& path,
                      const std::string& body);

/// Number of outbound requests attempted by this process. Lets tests assert
/// that an offline configuration never touches the network.
std::size_t request_count();

}  // namespace qana::http
