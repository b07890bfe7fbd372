#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "nestbench/http.hpp"
#include "nestbench/tree.hpp"

namespace nestbench {

struct AssocConfig {
  double alpha_dist = 0.5;
  double lambda_name = 0.5;
  double lambda_desc = 0.5;

  // Throws ConfigError unless alpha_dist > 0, both weights are non-negative and
  // they sum to 1 within 1e-9.
  void validate() const;
  static AssocConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Maps text to a unit-norm vector of fixed dimension. Implementations must return
// identical vectors for identical input, including under concurrent calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const;
};

// Feature-hashed bag of lowercase words with signed buckets, L2-normalized.
class HashedBagOfWords final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 256;
  static constexpr std::uint64_t kDefaultSeed = 0x5eed'b0a7'2024'0001ULL;

  explicit HashedBagOfWords(std::size_t dimension = kDefaultDimension,
                            std::uint64_t seed = kDefaultSeed);

  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

// Calls a remote service speaking {texts:[...]} -> {vectors:[[...]]}. Vectors are
// re-normalized and cached per text.
class RemoteEmbedding final : public EmbeddingProvider {
 public:
  RemoteEmbedding(EndpointConfig endpoint, std::size_t dimension);

  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(std::string_view text) const override;
  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const override;

 private:
  EndpointConfig endpoint_;
  std::size_t dimension_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::vector<double>> cache_;
};

// Source of pairwise node association scores in [0,1].
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual double assoc(NodeIndex u, NodeIndex v) const = 0;
};

double distance_penalty(int distance, double alpha);

// Lowercased identifier tokens: splits on camelCase boundaries, digit runs,
// underscores, dots, hyphens and whitespace.
std::vector<std::string> name_tokens(std::string_view name);

double name_similarity(std::string_view a, std::string_view b);
double name_similarity(const PropertyNode& u, const PropertyNode& v);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Cosine of description embeddings, clamped below at 0. Empty descriptions score 0.
double desc_similarity(const PropertyNode& u, const PropertyNode& v,
                       const EmbeddingProvider& provider);

double assoc(NodeIndex u, NodeIndex v, const PropertyTree& tree, const AssocConfig& cfg,
             const EmbeddingProvider& provider);

// Association scores for one tree with description embeddings computed once up
// front. Read-only after construction, so concurrent lookups are safe.
class AssociationContext final : public PairScorer {
 public:
  AssociationContext(const PropertyTree& tree, AssocConfig cfg, const EmbeddingProvider& provider);

  const PropertyTree& tree() const { return *tree_; }
  const AssocConfig& config() const { return cfg_; }
  double assoc(NodeIndex u, NodeIndex v) const override;
  double desc_similarity(NodeIndex u, NodeIndex v) const;

 private:
  const PropertyTree* tree_;
  AssocConfig cfg_;
  std::vector<std::vector<double>> embeddings_;  // empty vector = empty description
};

}  // namespace nestbench
