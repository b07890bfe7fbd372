#pragma once

#include <chrono>
#include <map>
#include <string>

#include <json.hpp>

namespace nestbench {

// Connection and retry policy shared by the completion and embedding clients.
struct EndpointConfig {
  std::string url;               // scheme://host[:port]/path
  std::string api_key_env;       // name of the environment variable holding the credential
  std::string model;
  double temperature = 1.0;
  int timeout_ms = 60000;
  int max_retries = 3;           // retries after the first attempt
  int backoff_ms = 500;          // doubled after each failed attempt
  int max_in_flight = 4;
  std::map<std::string, std::string> headers;

  static EndpointConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Reads the credential from the environment. Empty when api_key_env is unset.
  // Throws ConfigError when the variable is named but missing.
  std::string credential() const;
};

struct HttpTarget {
  std::string scheme_host_port;  // e.g. http://127.0.0.1:8080
  std::string path;              // e.g. /v1/chat/completions

  static HttpTarget parse(const std::string& url);
};

// POSTs `body` as JSON and returns the parsed response. Transport failures,
// timeouts, 429 and 5xx are retried up to cfg.max_retries times; 401/403 raise
// AuthError immediately; other non-2xx statuses raise a non-retryable
// EndpointError.
nlohmann::json post_json_with_retry(const EndpointConfig& cfg, const nlohmann::json& body);

}  // namespace nestbench
