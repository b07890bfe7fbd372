#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nestbench/schema.hpp"

namespace nestbench {

struct EvalOptions {
  // Off = keys-only ablation: entries carry paths without leaf values.
  bool include_values = true;
  // On = scalar arrays compare as multisets instead of by position.
  bool unordered_scalar_arrays = false;
  bool reject_extra_properties = true;

  static EvalOptions from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct PathSegment {
  enum class Kind { Key, Index, Occurrence };
  Kind kind = Kind::Key;
  std::string key;        // Key; for Occurrence, the canonical element value
  std::size_t index = 0;  // Index position or Occurrence rank

  friend auto operator<=>(const PathSegment&, const PathSegment&) = default;
};

using JsonPath = std::vector<PathSegment>;

std::string format_path(const JsonPath& path);

// Canonical scalar. Numbers compare by value (1.1 == 1.10, 92 == 92.0).
struct LeafValue {
  enum class Kind { Absent, Null, Boolean, Number, String };
  Kind kind = Kind::Absent;
  std::string text;

  friend auto operator<=>(const LeafValue&, const LeafValue&) = default;
};

struct PathEntry {
  JsonPath path;
  LeafValue leaf;

  friend auto operator<=>(const PathEntry&, const PathEntry&) = default;
};

using PathValueSet = std::set<PathEntry>;

std::string canonical_number(const nlohmann::json& number);
LeafValue canonical_leaf(const nlohmann::json& scalar);

PathValueSet flatten_paths(const nlohmann::json& value, const EvalOptions& options = {});

// Locates the first balanced object or array in a model response, after code
// fences are removed, that parses as JSON.
struct JsonCandidate {
  std::string text;
  nlohmann::json value;
  // The remainder after the candidate continues with JSON punctuation, as when a
  // model repeats properties after closing the document.
  bool trailing_structure = false;
};

std::optional<JsonCandidate> find_json_candidate(std::string_view raw);
std::optional<std::string> extract_json_candidate(std::string_view raw);

// 1 iff the response holds a single well-formed document that validates against
// the schema.
int syntax_score(std::string_view raw, const SchemaDoc& doc, const EvalOptions& options = {});

// Jaccard similarity of flattened path-value sets. Two empty sets score 1.
double jaccard(const PathValueSet& a, const PathValueSet& b);
double key_matching_score(const nlohmann::json& output, const nlohmann::json& gold,
                          const EvalOptions& options = {});

// Objects compare key-order-insensitively, arrays by position, numbers by value.
bool deep_equal(const nlohmann::json& a, const nlohmann::json& b);
int strict_score(const nlohmann::json& output, const nlohmann::json& gold);

struct InstanceScores {
  int syntax = 0;
  double key = 0.0;
  int strict = 0;
  bool parsed = false;
};

InstanceScores score_response(std::string_view raw, const nlohmann::json& gold,
                              const SchemaDoc& doc, const EvalOptions& options = {});

enum class ElementType { String, Number, Boolean, Enum, StringList, NumberList, ObjectList };

std::string_view element_type_name(ElementType t);

struct TypeTally {
  std::size_t credited = 0;
  std::size_t total = 0;
};

// Per element type, how many gold leaves (or whole lists) the output reproduces
// exactly at the same path. Types absent from the gold are not in the map.
std::map<ElementType, TypeTally> per_type_tally(const nlohmann::json* output,
                                                const nlohmann::json& gold, const SchemaDoc& doc);
std::map<ElementType, double> per_type_accuracy(const nlohmann::json& output,
                                                const nlohmann::json& gold, const SchemaDoc& doc);

}  // namespace nestbench
