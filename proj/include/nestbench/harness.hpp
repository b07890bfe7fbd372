#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestbench/association.hpp"
#include "nestbench/beam.hpp"
#include "nestbench/corpus.hpp"
#include "nestbench/evaluator.hpp"
#include "nestbench/schema.hpp"
#include "nestbench/tree.hpp"

namespace nestbench {

struct EvalInstance {
  std::string id;
  std::string domain;
  Difficulty difficulty = Difficulty::Medium;
  std::string text;
  SchemaDoc schema;
  nlohmann::json gold;  // null while awaiting annotation

  nlohmann::json to_json() const;
  static EvalInstance from_json(const nlohmann::json& j);
};

struct LoadOptions {
  std::size_t min_words = kDefaultMinWords;
  bool allow_pending_gold = false;
  std::vector<std::string> domains;  // empty = any
};

// One canonical JSON line per instance: sorted keys, UTF-8, no trailing newline.
std::string canonical_line(const EvalInstance& instance);

// Checks every record invariant; LoadError names the 1-based line and field.
std::vector<EvalInstance> parse_dataset(std::istream& in, const std::string& name,
                                        const LoadOptions& options = {});
std::vector<EvalInstance> load_dataset(const std::string& path, const LoadOptions& options = {});
void write_dataset(std::ostream& out, const std::vector<EvalInstance>& instances);
void save_dataset(const std::vector<EvalInstance>& instances, const std::string& path);

struct ModelOutput {
  std::string id;
  std::string response;
};

// Outputs file: one {"id", "response"} object per line.
std::vector<ModelOutput> parse_outputs(std::istream& in, const std::string& name);
std::vector<ModelOutput> load_outputs(const std::string& path);

// Prompt handed to a model under evaluation.
std::string build_extraction_prompt(const EvalInstance& instance);

struct InstanceResult {
  std::string id;
  std::string domain;
  Difficulty difficulty = Difficulty::Medium;
  InstanceScores scores;
  bool missing_output = false;
  std::size_t response_words = 0;
  std::size_t response_chars = 0;
};

struct Aggregate {
  std::size_t count = 0;
  double syntax = 0.0;  // percent
  double key = 0.0;
  double strict = 0.0;
};

struct Correlation {
  double r = 0.0;
  double r2 = 0.0;
};

struct LengthStats {
  std::optional<Correlation> key;     // response words vs key score
  std::optional<Correlation> strict;  // response words vs strict score
};

struct PromptLengthStats {
  std::size_t count = 0;
  double mean_words = 0.0;
  double stddev_words = 0.0;
  double mean_chars = 0.0;
  double stddev_chars = 0.0;
};

struct ScoreReport {
  std::string model;
  std::vector<InstanceResult> per_instance;  // dataset order
  Aggregate overall;
  std::map<Difficulty, Aggregate> by_difficulty;
  std::map<std::string, std::map<Difficulty, double>> per_domain;  // mean key percent
  std::map<ElementType, TypeTally> per_type;
  LengthStats length;
  std::map<Difficulty, PromptLengthStats> prompt_lengths;

  nlohmann::json to_json() const;
  static ScoreReport from_json(const nlohmann::json& j);
};

Aggregate aggregate(const std::vector<InstanceResult>& results);

std::map<Difficulty, PromptLengthStats> prompt_length_stats(const std::vector<EvalInstance>& instances);

struct RunOptions {
  EvalOptions eval;
  int workers = 1;
};

// InputError on duplicate output ids. Instances without an output score 0/0/0.
ScoreReport run_eval(const std::string& model, const std::vector<EvalInstance>& instances,
                     const std::vector<ModelOutput>& outputs, const RunOptions& options = {});

// Sample Pearson correlation (two-pass). CorrelationError on zero variance.
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

enum class ReportFormat { Table, Json };

struct ReportOptions {
  // Optional external per-model scores correlated against overall key score.
  std::map<std::string, double> external_scores;
};

// Models ranked by overall key score, descending; ties by model name.
std::vector<const ScoreReport*> rank_reports(const std::vector<ScoreReport>& reports);

std::string render_report(const std::vector<ScoreReport>& reports, ReportFormat format,
                          const ReportOptions& options = {});

struct GenerateOptions {
  BeamConfig beam;
  AssocConfig association;
  std::size_t min_words = kDefaultMinWords;
  double target_mean_properties = 17.5;
  bool draft_gold = false;
};

struct GenerateResult {
  std::vector<EvalInstance> instances;
  std::vector<std::string> diagnostics;
  double mean_properties = 0.0;  // mean subtree size over emitted instances
};

// Extract, emit, grade and package per domain. Texts are keyed by domain.
GenerateResult generate_benchmark(const std::vector<PropertyTree>& trees,
                                  const std::map<std::string, std::string>& texts,
                                  const GenerateOptions& options,
                                  const EmbeddingProvider& provider);

// Placeholder value that validates against the schema: first enum variant,
// zero, false, the title for strings, one element per array.
nlohmann::json draft_gold(const SchemaDoc& schema);

}  // namespace nestbench
