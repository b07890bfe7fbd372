#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nestbench/http.hpp"
#include "nestbench/schema.hpp"

namespace nestbench {

inline constexpr std::size_t kDefaultMinWords = 1500;

struct AggregationJob {
  std::vector<std::string> docs;
  std::string language;  // script-based tag, see detect_script_language
  std::size_t min_words = kDefaultMinWords;

  void validate() const;  // ArgumentError on empty docs or an empty document
};

// Coarse tag from the dominant script: "zh", "ja", "ko", "ru", "ar" or "en".
std::string detect_script_language(std::string_view text);

std::string build_aggregation_prompt(const AggregationJob& job);

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

// Chat-completions-style JSON over HTTP:
//   {model, temperature, messages:[{role:"user", content}]} -> choices[0].message.content
class ChatCompletionClient final : public CompletionClient {
 public:
  explicit ChatCompletionClient(EndpointConfig cfg);
  std::string complete(const std::string& prompt) override;
  const EndpointConfig& config() const { return cfg_; }

 private:
  EndpointConfig cfg_;
};

// Offline stand-in: returns a fixed text derived from the prompt.
class EchoCompletionStub final : public CompletionClient {
 public:
  std::string complete(const std::string& prompt) override;
};

// Runs prompts with at most `max_in_flight` concurrent requests. Results keep
// prompt order; the first failure is rethrown after all workers stop.
std::vector<std::string> complete_all(CompletionClient& client,
                                      const std::vector<std::string>& prompts,
                                      int max_in_flight);

std::size_t word_count(std::string_view text);

struct LengthCheck {
  bool pass = false;
  std::size_t words = 0;
};

LengthCheck length_check(std::string_view text, std::size_t min_words);

// Numeric literals in prose, thousands separators removed; signs are ignored.
std::vector<double> numeric_literals(std::string_view text);

// Dotted paths of gold leaves with no supporting span in `source`.
std::vector<std::string> grounding_probe(const nlohmann::json& gold, std::string_view source);

struct ConstraintRule {
  enum class Kind { Range, Equality, Regex };
  Kind kind = Kind::Range;
  std::string target;  // dotted path; "*" matches every array element
  double min = 0.0;
  double max = 0.0;
  std::string peer;
  std::string pattern;
  std::shared_ptr<const std::regex> compiled;

  static ConstraintRule from_json(const nlohmann::json& j);  // ConfigError when malformed
  nlohmann::json to_json() const;
};

// Rules file: {"<domain>": [rule, ...], ...}
std::map<std::string, std::vector<ConstraintRule>> load_constraint_rules(const nlohmann::json& doc);

// Rule paths (targets and equality peers) that do not resolve in `schema`.
std::vector<std::string> unresolved_rule_paths(const std::vector<ConstraintRule>& rules,
                                               const SchemaDoc& schema);

struct ConstraintViolation {
  std::size_t rule = 0;
  std::string path;
  std::string message;
};

std::vector<ConstraintViolation> constraint_check(const nlohmann::json& value,
                                                  const std::vector<ConstraintRule>& rules);

std::set<std::uint64_t> word_shingles(std::string_view text, int n);
double exact_jaccard(const std::set<std::uint64_t>& a, const std::set<std::uint64_t>& b);

// Universal hashing family h(x) = (a*x + b) mod (2^61 - 1), parameters drawn from
// a seeded generator.
class MinHasher {
 public:
  MinHasher(int num_hashes, std::uint64_t seed);
  std::vector<std::uint64_t> signature(const std::set<std::uint64_t>& shingles) const;
  static double estimate(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);
  int num_hashes() const { return static_cast<int>(a_.size()); }

 private:
  std::vector<std::uint64_t> a_;
  std::vector<std::uint64_t> b_;
};

struct LeakageOptions {
  int shingle_n = 3;
  int num_hashes = 128;
  double threshold = 0.8;
  std::uint64_t seed = 0x6d696e68617368ULL;
  std::size_t exact_limit = 10000;

  void validate() const;
  static LeakageOptions from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct LeakageFlag {
  std::size_t corpus_index = 0;
  double estimate = 0.0;
  std::optional<double> exact;
  bool flagged = false;
};

// One entry per corpus text.
std::vector<LeakageFlag> leakage_scan(std::string_view text, const std::vector<std::string>& corpus,
                                      const LeakageOptions& options = {});

}  // namespace nestbench
