#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "nestbench/error.hpp"
#include "nestbench/harness.hpp"

namespace nestbench {

namespace {

std::string slug(std::string_view s) {
  std::string out;
  bool dash = false;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      if (dash && !out.empty()) out += '-';
      out += static_cast<char>(std::tolower(c));
      dash = false;
    } else {
      dash = true;
    }
  }
  return out.empty() ? "domain" : out;
}

nlohmann::json draft_value(const SchemaNode& n) {
  switch (n.type) {
    case SchemaType::String:
      if (n.enum_values && !n.enum_values->empty()) return n.enum_values->front();
      return n.title.empty() ? n.name : n.title;
    case SchemaType::Number:
      return 0;
    case SchemaType::Boolean:
      return false;
    case SchemaType::Array: {
      auto arr = nlohmann::json::array();
      if (n.items) arr.push_back(draft_value(*n.items));
      return arr;
    }
    case SchemaType::Object: {
      auto obj = nlohmann::json::object();
      for (const auto& p : n.properties) obj[p.name] = draft_value(p);
      return obj;
    }
  }
  return nullptr;
}

}  // namespace

nlohmann::json draft_gold(const SchemaDoc& schema) { return draft_value(schema.root); }

GenerateResult generate_benchmark(const std::vector<PropertyTree>& trees,
                                  const std::map<std::string, std::string>& texts,
                                  const GenerateOptions& options,
                                  const EmbeddingProvider& provider) {
  options.beam.validate();
  options.association.validate();
  GenerateResult result;
  std::size_t total_props = 0;

  for (const auto& tree : trees) {
    const auto& domain = tree.domain();
    auto text_it = texts.find(domain);
    if (text_it == texts.end()) {
      result.diagnostics.push_back(fmt::format("{}: no source text, domain skipped", domain));
      continue;
    }
    const auto check = length_check(text_it->second, options.min_words);
    if (!check.pass) {
      result.diagnostics.push_back(fmt::format("{}: source text has {} words, need {}; domain skipped",
                                               domain, check.words, options.min_words));
      continue;
    }

    AssociationContext ctx(tree, options.association, provider);
    const auto subtrees = extract_subtrees(tree, options.beam, ctx);
    if (subtrees.empty()) {
      result.diagnostics.push_back(fmt::format(
          "{}: no subtree reaches depth {} with {} nodes (tree height {}, {} nodes)", domain,
          options.beam.d_min, options.beam.n_min, tree.height(), tree.size()));
      continue;
    }

    for (const auto& s : subtrees) {
      const auto& root_id = tree.id_of(s.root());
      SchemaDoc doc;
      try {
        doc = emit_schema(s, tree);
      } catch (const EmissionError& e) {
        result.diagnostics.push_back(fmt::format("{}/{}: {}", domain, root_id, e.what()));
        continue;
      }
      Difficulty diff;
      try {
        diff = grade_difficulty(doc);
      } catch (const GradingError& e) {
        result.diagnostics.push_back(
            fmt::format("{}/{}: dropped, schema depth {} outside graded range", domain, root_id, e.depth));
        continue;
      }
      EvalInstance inst;
      inst.id = slug(domain) + "-" + root_id;
      inst.domain = domain;
      inst.difficulty = diff;
      inst.text = text_it->second;
      inst.gold = options.draft_gold ? draft_gold(doc) : nlohmann::json(nullptr);
      inst.schema = std::move(doc);
      total_props += s.size();
      result.instances.push_back(std::move(inst));
    }
  }

  if (!result.instances.empty()) {
    result.mean_properties = static_cast<double>(total_props) / static_cast<double>(result.instances.size());
    if (std::abs(result.mean_properties - options.target_mean_properties) > 0.5 * options.target_mean_properties) {
      result.diagnostics.push_back(fmt::format("mean property count {:.1f} far from target {:.1f}",
                                               result.mean_properties, options.target_mean_properties));
    }
  }
  return result;
}

}  // namespace nestbench
