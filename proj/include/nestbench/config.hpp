#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestbench/association.hpp"
#include "nestbench/beam.hpp"
#include "nestbench/corpus.hpp"
#include "nestbench/evaluator.hpp"
#include "nestbench/http.hpp"

namespace nestbench {

// Everything the CLI reads from --config. Every section is optional; missing
// keys keep their defaults.
struct ToolkitConfig {
  BeamConfig beam;
  AssocConfig association;
  EvalOptions evaluator;
  EndpointConfig endpoint;
  std::optional<EndpointConfig> embedding_endpoint;  // unset = hashed bag-of-words
  std::size_t embedding_dimension = HashedBagOfWords::kDefaultDimension;
  std::uint64_t embedding_seed = HashedBagOfWords::kDefaultSeed;
  LeakageOptions leakage;
  std::size_t min_words = kDefaultMinWords;
  std::vector<std::string> domains;  // empty = accept any domain label
  int workers = 1;

  static ToolkitConfig from_json(const nlohmann::json& j);
  static ToolkitConfig load(const std::string& path);
  nlohmann::json to_json() const;

  // Reseeds the hashed embedding and the MinHash family.
  void apply_seed(std::uint64_t seed);

  std::unique_ptr<EmbeddingProvider> make_embedding_provider() const;
};

}  // namespace nestbench
