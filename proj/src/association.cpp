#include "nestbench/association.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "nestbench/error.hpp"

namespace nestbench {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // splitmix64 finalizer spreads the low bits used for bucketing
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void normalize(std::vector<double>& v) {
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0) throw EmbeddingError("embedding has zero norm");
  for (double& x : v) x /= norm;
}

}  // namespace

void AssocConfig::validate() const {
  if (!(alpha_dist > 0)) throw ConfigError("association alpha_dist must be positive");
  if (lambda_name < 0 || lambda_desc < 0) {
    throw ConfigError("association weights must be non-negative");
  }
  if (std::abs(lambda_name + lambda_desc - 1.0) > 1e-9) {
    throw ConfigError("association weights lambda_name + lambda_desc must equal 1");
  }
}

AssocConfig AssocConfig::from_json(const nlohmann::json& j) {
  AssocConfig c;
  c.alpha_dist = j.value("alpha_dist", c.alpha_dist);
  c.lambda_name = j.value("lambda_name", c.lambda_name);
  c.lambda_desc = j.value("lambda_desc", c.lambda_desc);
  c.validate();
  return c;
}

nlohmann::json AssocConfig::to_json() const {
  return {{"alpha_dist", alpha_dist}, {"lambda_name", lambda_name}, {"lambda_desc", lambda_desc}};
}

std::vector<std::vector<double>> EmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashedBagOfWords::HashedBagOfWords(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<double> HashedBagOfWords::embed(std::string_view text) const {
  std::vector<double> v(dimension_, 0.0);
  auto toks = words(text);
  // Token-free text still gets a deterministic unit vector.
  if (toks.empty()) toks.emplace_back(text);
  for (const auto& w : toks) {
    std::uint64_t h = fnv1a(w, seed_);
    double sign = (h >> 63) ? -1.0 : 1.0;
    v[h % dimension_] += sign;
  }
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0; })) {
    // Signed collisions cancelled out; fall back to the unsigned histogram.
    for (const auto& w : toks) v[fnv1a(w, seed_) % dimension_] += 1.0;
  }
  normalize(v);
  return v;
}

RemoteEmbedding::RemoteEmbedding(EndpointConfig endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)), dimension_(dimension) {}

std::vector<double> RemoteEmbedding::embed(std::string_view text) const {
  return embed_batch({std::string(text)}).front();
}

std::vector<std::vector<double>> RemoteEmbedding::embed_batch(
    const std::vector<std::string>& texts) const {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mu_);
    for (const auto& t : texts) {
      if (!cache_.count(t) &&
          std::find(missing.begin(), missing.end(), t) == missing.end()) {
        missing.push_back(t);
      }
    }
  }
  if (!missing.empty()) {
    nlohmann::json resp;
    try {
      resp = post_json_with_retry(endpoint_, {{"texts", missing}});
    } catch (const EndpointError& e) {
      throw EmbeddingError(std::string("embedding request failed: ") + e.what());
    }
    if (!resp.contains("vectors") || !resp["vectors"].is_array() ||
        resp["vectors"].size() != missing.size()) {
      throw EmbeddingError("embedding response has wrong vector count");
    }
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      auto v = resp["vectors"][i].get<std::vector<double>>();
      if (v.size() != dimension_) {
        throw EmbeddingError("embedding response has dimension " + std::to_string(v.size()) +
                             ", expected " + std::to_string(dimension_));
      }
      normalize(v);
      cache_.emplace(missing[i], std::move(v));
    }
  }
  std::lock_guard lock(mu_);
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

double distance_penalty(int distance, double alpha) {
  if (!(alpha > 0)) throw ConfigError("distance decay alpha must be positive");
  if (distance < 0) throw ArgumentError("distance must be non-negative");
  return std::exp(-alpha * distance);
}

std::vector<std::string> name_tokens(std::string_view name) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < name.size(); ++i) {
    unsigned char c = name[i];
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      unsigned char prev = name[i - 1];
      bool boundary = false;
      if (std::isdigit(c) != std::isdigit(prev)) boundary = true;
      if (std::isupper(c) && std::islower(prev)) boundary = true;
      // "HTTPServer": split before the last capital of an acronym run.
      if (std::isupper(c) && std::isupper(prev) && i + 1 < name.size() &&
          std::islower(static_cast<unsigned char>(name[i + 1]))) {
        boundary = true;
      }
      if (boundary) flush();
    }
    cur.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return out;
}

double name_similarity(std::string_view a, std::string_view b) {
  auto ta = name_tokens(a);
  auto tb = name_tokens(b);
  std::set<std::string> sa(ta.begin(), ta.end());
  std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

double name_similarity(const PropertyNode& u, const PropertyNode& v) {
  return name_similarity(u.name, v.name);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw EmbeddingError("embedding dimensions differ");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double desc_similarity(const PropertyNode& u, const PropertyNode& v,
                       const EmbeddingProvider& provider) {
  if (u.description.empty() || v.description.empty()) return 0.0;
  return std::clamp(cosine(provider.embed(u.description), provider.embed(v.description)), 0.0, 1.0);
}

double assoc(NodeIndex u, NodeIndex v, const PropertyTree& tree, const AssocConfig& cfg,
             const EmbeddingProvider& provider) {
  const double kappa = distance_penalty(tree_distance(tree, u, v), cfg.alpha_dist);
  const auto& nu = tree.node(u);
  const auto& nv = tree.node(v);
  double sim = 0.0;
  if (cfg.lambda_name > 0) sim += cfg.lambda_name * name_similarity(nu, nv);
  if (cfg.lambda_desc > 0) sim += cfg.lambda_desc * desc_similarity(nu, nv, provider);
  return kappa * sim;
}

AssociationContext::AssociationContext(const PropertyTree& tree, AssocConfig cfg,
                                       const EmbeddingProvider& provider)
    : tree_(&tree), cfg_(cfg) {
  cfg_.validate();
  embeddings_.resize(tree.size());
  if (cfg_.lambda_desc == 0) return;
  std::vector<std::string> texts;
  std::vector<NodeIndex> owners;
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    if (!tree.node(i).description.empty()) {
      texts.push_back(tree.node(i).description);
      owners.push_back(i);
    }
  }
  auto vecs = provider.embed_batch(texts);
  for (std::size_t k = 0; k < owners.size(); ++k) embeddings_[owners[k]] = std::move(vecs[k]);
}

double AssociationContext::desc_similarity(NodeIndex u, NodeIndex v) const {
  const auto& a = embeddings_.at(u);
  const auto& b = embeddings_.at(v);
  if (a.empty() || b.empty()) return 0.0;
  return std::clamp(cosine(a, b), 0.0, 1.0);
}

double AssociationContext::assoc(NodeIndex u, NodeIndex v) const {
  const double kappa = distance_penalty(tree_distance(*tree_, u, v), cfg_.alpha_dist);
  double sim = 0.0;
  if (cfg_.lambda_name > 0) sim += cfg_.lambda_name * name_similarity(tree_->node(u), tree_->node(v));
  if (cfg_.lambda_desc > 0) sim += cfg_.lambda_desc * desc_similarity(u, v);
  return kappa * sim;
}

}  // namespace nestbench
