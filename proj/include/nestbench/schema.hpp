#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nestbench/tree.hpp"

namespace nestbench {

enum class SchemaType { String, Number, Boolean, Object, Array };

std::string_view schema_type_name(SchemaType t);

// One node of the supported JSON Schema subset. `name` is the property key under
// the parent object (empty for the root and for array items).
struct SchemaNode {
  std::string name;
  std::string title;
  std::string description;
  SchemaType type = SchemaType::String;
  std::optional<std::vector<std::string>> enum_values;
  std::vector<std::string> required;
  std::vector<SchemaNode> properties;
  std::shared_ptr<const SchemaNode> items;

  const SchemaNode* property(std::string_view key) const;
};

struct SchemaDoc {
  SchemaNode root;

  // Throws SchemaError-style EmissionError on documents outside the subset.
  static SchemaDoc from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Lists every broken structural rule (required names missing from properties,
// enum on non-strings, items on non-arrays, empty titles or descriptions).
std::vector<std::string> schema_invariant_errors(const SchemaDoc& doc);

enum class Difficulty { Medium, Hard };

std::string_view difficulty_name(Difficulty d);
Difficulty parse_difficulty(std::string_view s);

SchemaDoc emit_schema(const Subtree& s, const PropertyTree& tree);

// Levels from the root to the deepest leaf, root = 1. Every schema node counts
// once, so an array and its item schema are two levels.
int schema_depth(const SchemaDoc& doc);
int schema_depth(const SchemaNode& node);

// Number of schema nodes below the root (properties and item schemas).
int schema_property_count(const SchemaDoc& doc);

inline constexpr int kMinGradedDepth = 3;
inline constexpr int kMaxGradedDepth = 7;

// Medium for depth 3-4, Hard for 5-7, GradingError otherwise.
Difficulty grade_difficulty(const SchemaDoc& doc);
Difficulty grade_depth(int depth);

enum class ViolationKind { Type, Required, Enum, Extra };

std::string_view violation_kind_name(ViolationKind k);

struct Violation {
  std::string path;  // dotted, array indices as numbers; empty for the root
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  bool pass = true;
  std::vector<Violation> violations;
};

struct ValidationOptions {
  bool reject_extra_properties = true;
};

ValidationReport validate_instance(const SchemaDoc& doc, const nlohmann::json& value,
                                   const ValidationOptions& options = {});

}  // namespace nestbench
