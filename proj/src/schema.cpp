#include "nestbench/schema.hpp"

#include <algorithm>
#include <set>

#include "nestbench/error.hpp"

namespace nestbench {

namespace {

constexpr std::pair<SchemaType, std::string_view> kTypeNames[] = {
    {SchemaType::String, "string"}, {SchemaType::Number, "number"},
    {SchemaType::Boolean, "boolean"}, {SchemaType::Object, "object"},
    {SchemaType::Array, "array"},
};

SchemaType parse_schema_type(std::string_view s) {
  for (const auto& [t, name] : kTypeNames) {
    if (name == s) return t;
  }
  throw EmissionError("unsupported schema type '" + std::string(s) + "'");
}

SchemaType scalar_type(Kind k) {
  switch (k) {
    case Kind::String:
    case Kind::Enum:
      return SchemaType::String;
    case Kind::Number:
      return SchemaType::Number;
    case Kind::Boolean:
      return SchemaType::Boolean;
    case Kind::Object:
      return SchemaType::Object;
    default:
      throw EmissionError("kind has no scalar schema type");
  }
}

std::string join_path(const std::string& base, std::string_view seg) {
  if (base.empty()) return std::string(seg);
  return base + "." + std::string(seg);
}

SchemaNode node_from_json(const nlohmann::json& j, std::string name) {
  if (!j.is_object()) throw EmissionError("schema node must be an object");
  SchemaNode n;
  n.name = std::move(name);
  if (!j.contains("type")) throw EmissionError("schema node '" + n.name + "' lacks a type");
  n.type = parse_schema_type(j["type"].get<std::string>());
  n.title = j.value("title", std::string{});
  n.description = j.value("description", std::string{});
  if (j.contains("enum")) n.enum_values = j["enum"].get<std::vector<std::string>>();
  if (j.contains("required")) n.required = j["required"].get<std::vector<std::string>>();
  if (j.contains("properties")) {
    for (const auto& [key, child] : j["properties"].items()) {
      n.properties.push_back(node_from_json(child, key));
    }
  }
  if (j.contains("items")) n.items = std::make_shared<SchemaNode>(node_from_json(j["items"], ""));
  return n;
}

nlohmann::json node_to_json(const SchemaNode& n) {
  nlohmann::json j;
  j["title"] = n.title;
  j["type"] = std::string(schema_type_name(n.type));
  j["description"] = n.description;
  if (n.enum_values) j["enum"] = *n.enum_values;
  if (n.type == SchemaType::Object) {
    j["required"] = n.required;
    nlohmann::json props = nlohmann::json::object();
    for (const auto& p : n.properties) props[p.name] = node_to_json(p);
    j["properties"] = std::move(props);
  }
  if (n.items) j["items"] = node_to_json(*n.items);
  return j;
}

void collect_invariant_errors(const SchemaNode& n, const std::string& path,
                              std::vector<std::string>& out) {
  const std::string where = path.empty() ? "(root)" : path;
  if (n.title.empty()) out.push_back(where + ": empty title");
  if (n.description.empty()) out.push_back(where + ": empty description");
  if (n.enum_values && n.type != SchemaType::String) out.push_back(where + ": enum on a non-string");
  if (n.enum_values && n.enum_values->empty()) out.push_back(where + ": empty enum");
  if ((n.items != nullptr) != (n.type == SchemaType::Array)) {
    out.push_back(where + ": items must be present exactly on arrays");
  }
  if (n.type != SchemaType::Object && (!n.properties.empty() || !n.required.empty())) {
    out.push_back(where + ": properties on a non-object");
  }
  std::set<std::string> keys;
  for (const auto& p : n.properties) {
    if (!keys.insert(p.name).second) out.push_back(where + ": duplicate property " + p.name);
  }
  for (const auto& r : n.required) {
    if (!keys.count(r)) out.push_back(where + ": required name " + r + " not in properties");
  }
  for (const auto& p : n.properties) collect_invariant_errors(p, join_path(path, p.name), out);
  if (n.items) collect_invariant_errors(*n.items, join_path(path, "[]"), out);
}

SchemaNode emit_node(NodeIndex u, const Subtree& s, const PropertyTree& tree) {
  const auto& pn = tree.node(u);
  const auto& vk = pn.value_kind;
  if (vk.kind == Kind::Unspecified) {
    throw EmissionError("node '" + pn.id + "' has no value kind");
  }
  SchemaNode n;
  n.name = pn.name;
  n.title = pn.name;
  n.description = pn.description.empty() ? pn.name : pn.description;

  auto fill_object = [&](SchemaNode& obj) {
    obj.type = SchemaType::Object;
    for (NodeIndex c : pn.children) {
      if (!s.contains(c)) continue;
      obj.properties.push_back(emit_node(c, s, tree));
      obj.required.push_back(tree.node(c).name);
    }
  };

  switch (vk.kind) {
    case Kind::Object:
      fill_object(n);
      break;
    case Kind::Array: {
      n.type = SchemaType::Array;
      SchemaNode item;
      item.title = pn.name + "Item";
      item.description = n.description;
      if (vk.item_kind == Kind::Object) {
        fill_object(item);
      } else {
        item.type = scalar_type(vk.item_kind);
        if (vk.item_kind == Kind::Enum) item.enum_values = vk.variants;
      }
      n.items = std::make_shared<SchemaNode>(std::move(item));
      break;
    }
    case Kind::Enum:
      n.type = SchemaType::String;
      n.enum_values = vk.variants;
      break;
    default:
      n.type = scalar_type(vk.kind);
      break;
  }
  return n;
}

int count_nodes(const SchemaNode& n) {
  int total = 0;
  for (const auto& p : n.properties) total += 1 + count_nodes(p);
  if (n.items) total += 1 + count_nodes(*n.items);
  return total;
}

bool matches_type(const nlohmann::json& v, SchemaType t) {
  switch (t) {
    case SchemaType::String:
      return v.is_string();
    case SchemaType::Number:
      return v.is_number();
    case SchemaType::Boolean:
      return v.is_boolean();
    case SchemaType::Object:
      return v.is_object();
    case SchemaType::Array:
      return v.is_array();
  }
  return false;
}

std::string json_type_name(const nlohmann::json& v) {
  if (v.is_number()) return "number";
  return v.type_name();
}

void validate_node(const SchemaNode& n, const nlohmann::json& v, const std::string& path,
                   const ValidationOptions& opts, std::vector<Violation>& out) {
  if (!matches_type(v, n.type)) {
    out.push_back({path, ViolationKind::Type,
                   "expected " + std::string(schema_type_name(n.type)) + ", got " +
                       json_type_name(v)});
    return;
  }
  if (n.enum_values) {
    const auto& s = v.get_ref<const std::string&>();
    if (std::find(n.enum_values->begin(), n.enum_values->end(), s) == n.enum_values->end()) {
      out.push_back({path, ViolationKind::Enum, "value '" + s + "' is not an allowed variant"});
    }
  }
  if (n.type == SchemaType::Object) {
    for (const auto& r : n.required) {
      if (!v.contains(r)) {
        out.push_back({join_path(path, r), ViolationKind::Required, "required property missing"});
      }
    }
    for (const auto& [key, child] : v.items()) {
      const SchemaNode* ps = n.property(key);
      if (ps == nullptr) {
        if (opts.reject_extra_properties) {
          out.push_back({join_path(path, key), ViolationKind::Extra, "property not in schema"});
        }
        continue;
      }
      validate_node(*ps, child, join_path(path, key), opts, out);
    }
  }
  if (n.type == SchemaType::Array && n.items) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      validate_node(*n.items, v[i], join_path(path, std::to_string(i)), opts, out);
    }
  }
}

}  // namespace

std::string_view schema_type_name(SchemaType t) {
  for (const auto& [type, name] : kTypeNames) {
    if (type == t) return name;
  }
  return "unknown";
}

const SchemaNode* SchemaNode::property(std::string_view key) const {
  for (const auto& p : properties) {
    if (p.name == key) return &p;
  }
  return nullptr;
}

SchemaDoc SchemaDoc::from_json(const nlohmann::json& j) {
  SchemaDoc doc{node_from_json(j, "")};
  if (auto errs = schema_invariant_errors(doc); !errs.empty()) throw EmissionError(errs.front());
  return doc;
}

nlohmann::json SchemaDoc::to_json() const { return node_to_json(root); }

std::vector<std::string> schema_invariant_errors(const SchemaDoc& doc) {
  std::vector<std::string> out;
  collect_invariant_errors(doc.root, "", out);
  return out;
}

std::string_view difficulty_name(Difficulty d) { return d == Difficulty::Medium ? "Medium" : "Hard"; }

Difficulty parse_difficulty(std::string_view s) {
  if (s == "Medium") return Difficulty::Medium;
  if (s == "Hard") return Difficulty::Hard;
  throw GradingError("unknown difficulty '" + std::string(s) + "'");
}

SchemaDoc emit_schema(const Subtree& s, const PropertyTree& tree) {
  s.validate(tree);
  return SchemaDoc{emit_node(s.root(), s, tree)};
}

int schema_depth(const SchemaNode& node) {
  int below = 0;
  for (const auto& p : node.properties) below = std::max(below, schema_depth(p));
  if (node.items) below = std::max(below, schema_depth(*node.items));
  return 1 + below;
}

int schema_depth(const SchemaDoc& doc) { return schema_depth(doc.root); }

int schema_property_count(const SchemaDoc& doc) { return count_nodes(doc.root); }

Difficulty grade_depth(int depth) {
  if (depth >= 3 && depth <= 4) return Difficulty::Medium;
  if (depth >= 5 && depth <= kMaxGradedDepth) return Difficulty::Hard;
  GradingError e("schema depth " + std::to_string(depth) + " is outside the gradable range [" +
                 std::to_string(kMinGradedDepth) + ", " + std::to_string(kMaxGradedDepth) + "]");
  e.depth = depth;
  throw e;
}

Difficulty grade_difficulty(const SchemaDoc& doc) { return grade_depth(schema_depth(doc)); }

std::string_view violation_kind_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::Type:
      return "type";
    case ViolationKind::Required:
      return "required";
    case ViolationKind::Enum:
      return "enum";
    case ViolationKind::Extra:
      return "extra";
  }
  return "unknown";
}

ValidationReport validate_instance(const SchemaDoc& doc, const nlohmann::json& value,
                                   const ValidationOptions& options) {
  ValidationReport r;
  validate_node(doc.root, value, "", options, r.violations);
  r.pass = r.violations.empty();
  return r;
}

}  // namespace nestbench
