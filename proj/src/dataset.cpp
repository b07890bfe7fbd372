#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "nestbench/error.hpp"
#include "nestbench/harness.hpp"

namespace nestbench {

nlohmann::json EvalInstance::to_json() const {
  return {{"id", id},
          {"domain", domain},
          {"difficulty", std::string(difficulty_name(difficulty))},
          {"text", text},
          {"schema", schema.to_json()},
          {"gold", gold}};
}

EvalInstance EvalInstance::from_json(const nlohmann::json& j) {
  EvalInstance e;
  e.id = j.at("id").get<std::string>();
  e.domain = j.at("domain").get<std::string>();
  e.difficulty = parse_difficulty(j.at("difficulty").get<std::string>());
  e.text = j.at("text").get<std::string>();
  e.schema = SchemaDoc::from_json(j.at("schema"));
  e.gold = j.contains("gold") ? j["gold"] : nlohmann::json();
  return e;
}

std::string canonical_line(const EvalInstance& instance) {
  return instance.to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

std::vector<EvalInstance> parse_dataset(std::istream& in, const std::string& name,
                                        const LoadOptions& options) {
  std::vector<EvalInstance> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw LoadError(name, lineno, "(line)", std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw LoadError(name, lineno, "(line)", "record is not an object");
    for (const char* field : {"id", "domain", "difficulty", "text", "schema", "gold"}) {
      if (!j.contains(field)) throw LoadError(name, lineno, field, "missing");
    }
    for (const char* field : {"id", "domain", "difficulty", "text"}) {
      if (!j[field].is_string()) throw LoadError(name, lineno, field, "must be a string");
    }
    EvalInstance inst;
    try {
      inst = EvalInstance::from_json(j);
    } catch (const GradingError& e) {
      throw LoadError(name, lineno, "difficulty", e.what());
    } catch (const Error& e) {
      throw LoadError(name, lineno, "schema", e.what());
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(name, lineno, "schema", e.what());
    }
    if (inst.id.empty()) throw LoadError(name, lineno, "id", "empty");
    if (!ids.insert(inst.id).second) throw LoadError(name, lineno, "id", "duplicate id " + inst.id);
    if (!options.domains.empty() &&
        std::find(options.domains.begin(), options.domains.end(), inst.domain) == options.domains.end()) {
      throw LoadError(name, lineno, "domain", "unknown domain '" + inst.domain + "'");
    }
    if (auto errs = schema_invariant_errors(inst.schema); !errs.empty()) {
      throw LoadError(name, lineno, "schema", errs.front());
    }
    try {
      if (grade_difficulty(inst.schema) != inst.difficulty) {
        throw LoadError(name, lineno, "difficulty",
                        "tag disagrees with schema depth " + std::to_string(schema_depth(inst.schema)));
      }
    } catch (const GradingError& e) {
      throw LoadError(name, lineno, "schema", e.what());
    }
    if (inst.gold.is_null()) {
      if (!options.allow_pending_gold) throw LoadError(name, lineno, "gold", "missing gold value");
    } else if (auto rep = validate_instance(inst.schema, inst.gold); !rep.pass) {
      const auto& v = rep.violations.front();
      throw LoadError(name, lineno, "gold",
                      std::string(violation_kind_name(v.kind)) + " violation at " +
                          (v.path.empty() ? "(root)" : v.path) + ": " + v.message);
    }
    if (auto lc = length_check(inst.text, options.min_words); !lc.pass) {
      throw LoadError(name, lineno, "text",
                      std::to_string(lc.words) + " words, below the floor of " +
                          std::to_string(options.min_words));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<EvalInstance> load_dataset(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, 0, "(file)", "cannot open");
  return parse_dataset(in, path, options);
}

void write_dataset(std::ostream& out, const std::vector<EvalInstance>& instances) {
  for (const auto& inst : instances) out << canonical_line(inst) << '\n';
}

void save_dataset(const std::vector<EvalInstance>& instances, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  write_dataset(out, instances);
  if (!out) throw Error("write to " + path + " failed");
}

std::vector<ModelOutput> parse_outputs(std::istream& in, const std::string& name) {
  std::vector<ModelOutput> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("response").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(name, lineno, "(line)", e.what());
    }
  }
  return out;
}

std::vector<ModelOutput> load_outputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, 0, "(file)", "cannot open");
  return parse_outputs(in, path);
}

std::string build_extraction_prompt(const EvalInstance& instance) {
  std::ostringstream p;
  p << "Extract the information described by the JSON schema below from the text. "
       "Reply with a single JSON object that conforms to the schema.\n\n"
    << "Schema:\n"
    << instance.schema.to_json().dump(2) << "\n\n"
    << "Text:\n"
    << instance.text << "\n";
  return p.str();
}

}  // namespace nestbench
