#include "nestbench/http.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "nestbench/error.hpp"

namespace nestbench {

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
  EndpointConfig c;
  c.url = j.value("url", c.url);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.model = j.value("model", c.model);
  c.temperature = j.value("temperature", c.temperature);
  c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  if (j.contains("headers")) c.headers = j["headers"].get<std::map<std::string, std::string>>();
  if (c.timeout_ms <= 0) throw ConfigError("endpoint timeout_ms must be positive");
  if (c.max_retries < 0) throw ConfigError("endpoint max_retries must be non-negative");
  if (c.backoff_ms < 0) throw ConfigError("endpoint backoff_ms must be non-negative");
  if (c.max_in_flight < 1) throw ConfigError("endpoint max_in_flight must be at least 1");
  return c;
}

nlohmann::json EndpointConfig::to_json() const {
  return {{"url", url},
          {"api_key_env", api_key_env},
          {"model", model},
          {"temperature", temperature},
          {"timeout_ms", timeout_ms},
          {"max_retries", max_retries},
          {"backoff_ms", backoff_ms},
          {"max_in_flight", max_in_flight},
          {"headers", headers}};
}

std::string EndpointConfig::credential() const {
  if (api_key_env.empty()) return {};
  const char* v = std::getenv(api_key_env.c_str());
  if (v == nullptr || *v == '\0') {
    throw ConfigError("credential environment variable " + api_key_env + " is not set");
  }
  return v;
}

HttpTarget HttpTarget::parse(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint url lacks a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  HttpTarget t;
  if (path_start == std::string::npos) {
    t.scheme_host_port = url;
    t.path = "/";
  } else {
    t.scheme_host_port = url.substr(0, path_start);
    t.path = url.substr(path_start);
  }
  return t;
}

nlohmann::json post_json_with_retry(const EndpointConfig& cfg, const nlohmann::json& body) {
  const auto target = HttpTarget::parse(cfg.url);
  const std::string key = cfg.credential();

  httplib::Headers headers;
  for (const auto& [k, v] : cfg.headers) headers.emplace(k, v);
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  const std::string payload = body.dump();
  int delay = cfg.backoff_ms;
  std::string last_error;
  const int attempts = cfg.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client cli(target.scheme_host_port);
    const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);

    auto res = cli.Post(target.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 401 || res->status == 403) {
      throw AuthError("endpoint rejected credential (HTTP " + std::to_string(res->status) + ")");
    } else if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status < 200 || res->status >= 300) {
      throw EndpointError("endpoint returned HTTP " + std::to_string(res->status), false, attempt);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw EndpointError(std::string("endpoint returned malformed JSON: ") + e.what(), false,
                            attempt);
      }
    }
    if (attempt < attempts && delay > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      delay *= 2;
    }
  }
  throw EndpointError(last_error + " (gave up after " + std::to_string(attempts) + " attempts)",
                      true, attempts);
}

}  // namespace nestbench
