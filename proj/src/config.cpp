#include "nestbench/config.hpp"

#include <fstream>

#include "nestbench/error.hpp"

namespace nestbench {

ToolkitConfig ToolkitConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  ToolkitConfig c;
  try {
    if (j.contains("beam")) c.beam = BeamConfig::from_json(j["beam"]);
    if (j.contains("association")) c.association = AssocConfig::from_json(j["association"]);
    if (j.contains("evaluator")) c.evaluator = EvalOptions::from_json(j["evaluator"]);
    if (j.contains("endpoint")) c.endpoint = EndpointConfig::from_json(j["endpoint"]);
    if (j.contains("embedding")) {
      const auto& e = j["embedding"];
      c.embedding_dimension = e.value("dimension", c.embedding_dimension);
      if (e.contains("endpoint")) c.embedding_endpoint = EndpointConfig::from_json(e["endpoint"]);
    }
    if (j.contains("leakage")) c.leakage = LeakageOptions::from_json(j["leakage"]);
    c.min_words = j.value("min_words", c.min_words);
    if (j.contains("domains")) c.domains = j["domains"].get<std::vector<std::string>>();
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (c.min_words == 0) throw ConfigError("min_words must be positive");
  if (c.embedding_dimension == 0) throw ConfigError("embedding dimension must be positive");
  return c;
}

ToolkitConfig ToolkitConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

nlohmann::json ToolkitConfig::to_json() const {
  nlohmann::json embedding = {{"dimension", embedding_dimension}};
  if (embedding_endpoint) embedding["endpoint"] = embedding_endpoint->to_json();
  return {{"beam", beam.to_json()},
          {"association", association.to_json()},
          {"evaluator", evaluator.to_json()},
          {"endpoint", endpoint.to_json()},
          {"embedding", embedding},
          {"leakage", leakage.to_json()},
          {"min_words", min_words},
          {"domains", domains},
          {"workers", workers}};
}

void ToolkitConfig::apply_seed(std::uint64_t seed) {
  embedding_seed = seed;
  leakage.seed = seed;
}

std::unique_ptr<EmbeddingProvider> ToolkitConfig::make_embedding_provider() const {
  if (embedding_endpoint) return std::make_unique<RemoteEmbedding>(*embedding_endpoint, embedding_dimension);
  return std::make_unique<HashedBagOfWords>(embedding_dimension, embedding_seed);
}

}  // namespace nestbench
