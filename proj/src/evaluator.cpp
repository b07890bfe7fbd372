#include "nestbench/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>

namespace nestbench {

namespace {

bool is_scalar(const nlohmann::json& v) { return !v.is_object() && !v.is_array(); }

void flatten_into(const nlohmann::json& v, JsonPath& path, const EvalOptions& opts,
                  PathValueSet& out) {
  if (v.is_object()) {
    for (const auto& [key, child] : v.items()) {
      path.push_back({PathSegment::Kind::Key, key, 0});
      flatten_into(child, path, opts, out);
      path.pop_back();
    }
    return;
  }
  if (v.is_array()) {
    const bool multiset = opts.unordered_scalar_arrays &&
                          std::all_of(v.begin(), v.end(), [](const auto& e) { return is_scalar(e); });
    std::map<LeafValue, std::size_t> seen;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (multiset) {
        const auto leaf = canonical_leaf(v[i]);
        const std::size_t rank = seen[leaf]++;
        path.push_back({PathSegment::Kind::Occurrence,
                        std::to_string(static_cast<int>(leaf.kind)) + ":" + leaf.text, rank});
      } else {
        path.push_back({PathSegment::Kind::Index, {}, i});
      }
      flatten_into(v[i], path, opts, out);
      path.pop_back();
    }
    return;
  }
  PathEntry e{path, opts.include_values ? canonical_leaf(v) : LeafValue{}};
  out.insert(std::move(e));
}

std::string strip_fences(std::string_view raw) {
  static const std::regex fence("```[A-Za-z0-9_+\\-]*");
  return std::regex_replace(std::string(raw), fence, "");
}

// Index one past the bracket closing the structure opened at `start`, or npos.
std::size_t balanced_end(const std::string& s, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '{':
        stack.push_back('}');
        break;
      case '[':
        stack.push_back(']');
        break;
      case '}':
      case ']':
        if (stack.empty() || stack.back() != c) return std::string::npos;
        stack.pop_back();
        if (stack.empty()) return i + 1;
        break;
      default:
        break;
    }
  }
  return std::string::npos;
}

void tally_node(const SchemaNode& schema, const nlohmann::json& gold, const nlohmann::json* out,
                std::map<ElementType, TypeTally>& tally) {
  auto credit = [&](ElementType t) {
    auto& slot = tally[t];
    ++slot.total;
    if (out != nullptr && deep_equal(*out, gold)) ++slot.credited;
  };
  switch (schema.type) {
    case SchemaType::Object: {
      if (!gold.is_object()) return;
      for (const auto& prop : schema.properties) {
        auto it = gold.find(prop.name);
        if (it == gold.end()) continue;
        const nlohmann::json* child = nullptr;
        if (out != nullptr && out->is_object()) {
          auto oit = out->find(prop.name);
          if (oit != out->end()) child = &*oit;
        }
        tally_node(prop, *it, child, tally);
      }
      break;
    }
    case SchemaType::Array: {
      if (!gold.is_array() || !schema.items) return;
      switch (schema.items->type) {
        case SchemaType::Object: {
          credit(ElementType::ObjectList);
          for (std::size_t i = 0; i < gold.size(); ++i) {
            const nlohmann::json* child = nullptr;
            if (out != nullptr && out->is_array() && i < out->size()) child = &(*out)[i];
            tally_node(*schema.items, gold[i], child, tally);
          }
          break;
        }
        case SchemaType::String:
          credit(ElementType::StringList);
          break;
        case SchemaType::Number:
          credit(ElementType::NumberList);
          break;
        default:
          break;  // boolean and nested lists fall outside the element taxonomy
      }
      break;
    }
    case SchemaType::String:
      credit(schema.enum_values ? ElementType::Enum : ElementType::String);
      break;
    case SchemaType::Number:
      credit(ElementType::Number);
      break;
    case SchemaType::Boolean:
      credit(ElementType::Boolean);
      break;
  }
}

}  // namespace

EvalOptions EvalOptions::from_json(const nlohmann::json& j) {
  EvalOptions o;
  o.include_values = j.value("include_values", o.include_values);
  o.unordered_scalar_arrays = j.value("unordered_scalar_arrays", o.unordered_scalar_arrays);
  o.reject_extra_properties = j.value("reject_extra_properties", o.reject_extra_properties);
  return o;
}

nlohmann::json EvalOptions::to_json() const {
  return {{"include_values", include_values},
          {"unordered_scalar_arrays", unordered_scalar_arrays},
          {"reject_extra_properties", reject_extra_properties}};
}

std::string format_path(const JsonPath& path) {
  std::string out;
  for (const auto& seg : path) {
    if (!out.empty()) out += '.';
    switch (seg.kind) {
      case PathSegment::Kind::Key:
        out += seg.key;
        break;
      case PathSegment::Kind::Index:
        out += std::to_string(seg.index);
        break;
      case PathSegment::Kind::Occurrence:
        out += "{" + seg.key + "#" + std::to_string(seg.index) + "}";
        break;
    }
  }
  return out;
}

std::string canonical_number(const nlohmann::json& number) {
  if (number.is_number_unsigned()) return std::to_string(number.get<std::uint64_t>());
  if (number.is_number_integer()) return std::to_string(number.get<std::int64_t>());
  const double d = number.get<double>();
  if (std::isfinite(d) && d == std::trunc(d) && std::abs(d) < 9.0e18) {
    return std::to_string(static_cast<std::int64_t>(d));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

LeafValue canonical_leaf(const nlohmann::json& v) {
  if (v.is_null()) return {LeafValue::Kind::Null, {}};
  if (v.is_boolean()) return {LeafValue::Kind::Boolean, v.get<bool>() ? "true" : "false"};
  if (v.is_number()) return {LeafValue::Kind::Number, canonical_number(v)};
  if (v.is_string()) return {LeafValue::Kind::String, v.get<std::string>()};
  return {};
}

PathValueSet flatten_paths(const nlohmann::json& value, const EvalOptions& options) {
  PathValueSet out;
  JsonPath path;
  flatten_into(value, path, options, out);
  return out;
}

std::optional<JsonCandidate> find_json_candidate(std::string_view raw) {
  const std::string text = strip_fences(raw);
  for (std::size_t i = text.find_first_of("{["); i != std::string::npos;
       i = text.find_first_of("{[", i + 1)) {
    const std::size_t end = balanced_end(text, i);
    if (end == std::string::npos) continue;
    JsonCandidate c;
    c.text = text.substr(i, end - i);
    try {
      c.value = nlohmann::json::parse(c.text);
    } catch (const nlohmann::json::parse_error&) {
      continue;
    }
    const auto rest = text.find_first_not_of(" \t\r\n", end);
    c.trailing_structure =
        rest != std::string::npos && std::string_view(",:{}[]\"").find(text[rest]) != std::string_view::npos;
    return c;
  }
  return std::nullopt;
}

std::optional<std::string> extract_json_candidate(std::string_view raw) {
  auto c = find_json_candidate(raw);
  if (!c) return std::nullopt;
  return c->text;
}

int syntax_score(std::string_view raw, const SchemaDoc& doc, const EvalOptions& options) {
  auto c = find_json_candidate(raw);
  if (!c || c->trailing_structure) return 0;
  ValidationOptions vo;
  vo.reject_extra_properties = options.reject_extra_properties;
  return validate_instance(doc, c->value, vo).pass ? 1 : 0;
}

double jaccard(const PathValueSet& a, const PathValueSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& e : a) inter += b.count(e);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double key_matching_score(const nlohmann::json& output, const nlohmann::json& gold,
                          const EvalOptions& options) {
  return jaccard(flatten_paths(output, options), flatten_paths(gold, options));
}

bool deep_equal(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) return canonical_number(a) == canonical_number(b);
  if (a.type() != b.type()) return false;
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (const auto& [key, av] : a.items()) {
      auto it = b.find(key);
      if (it == b.end() || !deep_equal(av, *it)) return false;
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!deep_equal(a[i], b[i])) return false;
    }
    return true;
  }
  return a == b;
}

int strict_score(const nlohmann::json& output, const nlohmann::json& gold) {
  return deep_equal(output, gold) ? 1 : 0;
}

InstanceScores score_response(std::string_view raw, const nlohmann::json& gold,
                              const SchemaDoc& doc, const EvalOptions& options) {
  InstanceScores s;
  auto c = find_json_candidate(raw);
  if (!c) return s;
  s.parsed = true;
  ValidationOptions vo;
  vo.reject_extra_properties = options.reject_extra_properties;
  const bool well_formed = !c->trailing_structure;
  s.syntax = well_formed && validate_instance(doc, c->value, vo).pass ? 1 : 0;
  s.key = key_matching_score(c->value, gold, options);
  s.strict = well_formed ? strict_score(c->value, gold) : 0;
  return s;
}

std::string_view element_type_name(ElementType t) {
  switch (t) {
    case ElementType::String:
      return "string";
    case ElementType::Number:
      return "number";
    case ElementType::Boolean:
      return "boolean";
    case ElementType::Enum:
      return "enum";
    case ElementType::StringList:
      return "string-list";
    case ElementType::NumberList:
      return "number-list";
    case ElementType::ObjectList:
      return "object-list";
  }
  return "unknown";
}

std::map<ElementType, TypeTally> per_type_tally(const nlohmann::json* output,
                                                const nlohmann::json& gold, const SchemaDoc& doc) {
  std::map<ElementType, TypeTally> tally;
  tally_node(doc.root, gold, output, tally);
  return tally;
}

std::map<ElementType, double> per_type_accuracy(const nlohmann::json& output,
                                                const nlohmann::json& gold, const SchemaDoc& doc) {
  std::map<ElementType, double> out;
  for (const auto& [t, c] : per_type_tally(&output, gold, doc)) {
    out[t] = c.total == 0 ? 0.0 : static_cast<double>(c.credited) / static_cast<double>(c.total);
  }
  return out;
}

}  // namespace nestbench
