#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nestbench/config.hpp"
#include "nestbench/error.hpp"
#include "nestbench/harness.hpp"

using namespace nestbench;
using nlohmann::json;

namespace {

constexpr int kExitFindings = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

PropertyTree load_tree(const std::string& path) {
  const auto doc = read_json(path);
  if (doc.contains("nodes")) return PropertyTree::from_json(doc);
  return PropertyTree::from_nested_json(doc);
}

std::pair<std::string, std::string> split_pair(const std::string& s, const std::string& what) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ArgumentError(what + " must look like NAME=VALUE: " + s);
  return {s.substr(0, eq), s.substr(eq + 1)};
}

struct BeamOverrides {
  std::optional<int> d_min, d_max, n_min, n_max, top_k;

  void add(CLI::App* cmd) {
    cmd->add_option("--d-min", d_min, "Minimum subtree depth");
    cmd->add_option("--d-max", d_max, "Maximum subtree depth");
    cmd->add_option("--n-min", n_min, "Minimum subtree size");
    cmd->add_option("--n-max", n_max, "Maximum subtree size");
    cmd->add_option("--top-k", top_k, "Beam width");
  }
  void apply(BeamConfig& b) const {
    if (d_min) b.d_min = *d_min;
    if (d_max) b.d_max = *d_max;
    if (n_min) b.n_min = *n_min;
    if (n_max) b.n_max = *n_max;
    if (top_k) b.top_k = *top_k;
    b.validate();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build and score nested JSON extraction benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Configuration JSON file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for the hashed embedding and MinHash family");

  // tree-import
  auto* c_import = app.add_subcommand("tree-import", "Validate a property tree and write the flat form");
  std::string import_in, import_out;
  c_import->add_option("input", import_in, "Tree JSON (flat or nested)")->required();
  c_import->add_option("-o,--output", import_out, "Output path (default stdout)");

  // extract
  auto* c_extract = app.add_subcommand("extract", "Extract subtrees by beam search");
  std::string extract_tree, extract_out;
  BeamOverrides extract_beam;
  c_extract->add_option("tree", extract_tree, "Tree JSON")->required();
  c_extract->add_option("-o,--output", extract_out, "Output path (default stdout)");
  extract_beam.add(c_extract);

  // emit-schema
  auto* c_emit = app.add_subcommand("emit-schema", "Emit the JSON Schema of a subtree");
  std::string emit_tree, emit_subtree, emit_out;
  c_emit->add_option("tree", emit_tree, "Tree JSON")->required();
  c_emit->add_option("subtree", emit_subtree, "Subtree JSON ({root_id, member_ids}) or an array of them")
      ->required();
  c_emit->add_option("-o,--output", emit_out, "Output path (default stdout)");

  // generate
  auto* c_gen = app.add_subcommand("generate", "Extract, emit, grade and package instances");
  std::vector<std::string> gen_trees, gen_texts;
  std::string gen_out;
  bool gen_draft = false;
  BeamOverrides gen_beam;
  c_gen->add_option("trees", gen_trees, "Tree JSON files")->required();
  c_gen->add_option("--text", gen_texts, "DOMAIN=PATH source text per domain")->required();
  c_gen->add_option("-o,--output", gen_out, "Dataset JSONL path")->required();
  c_gen->add_flag("--draft-gold", gen_draft, "Fill gold with schema-valid placeholders");
  gen_beam.add(c_gen);

  // aggregate
  auto* c_agg = app.add_subcommand("aggregate", "Synthesize one source text from several documents");
  std::vector<std::string> agg_docs;
  std::string agg_out, agg_language;
  bool agg_stub = false, agg_prompt_only = false;
  c_agg->add_option("docs", agg_docs, "Document text files")->required();
  c_agg->add_option("-o,--output", agg_out, "Output path (default stdout)");
  c_agg->add_option("--language", agg_language, "Output language tag (default: detected)");
  c_agg->add_flag("--stub", agg_stub, "Use the offline echo stub instead of the endpoint");
  c_agg->add_flag("--prompt-only", agg_prompt_only, "Print the prompt without calling anything");

  // audit
  auto* c_audit = app.add_subcommand("audit", "Run automated quality guards over a dataset");
  std::string audit_dataset, audit_rules, audit_out;
  std::vector<std::string> audit_corpus;
  c_audit->add_option("dataset", audit_dataset, "Dataset JSONL")->required();
  c_audit->add_option("--rules", audit_rules, "Constraint rules JSON");
  c_audit->add_option("--corpus", audit_corpus, "Public corpus text files for the leakage scan");
  c_audit->add_option("-o,--output", audit_out, "Audit JSON path (default stdout)");

  // eval
  auto* c_eval = app.add_subcommand("eval", "Score model outputs against a dataset");
  std::string eval_dataset, eval_outputs, eval_model, eval_out;
  c_eval->add_option("dataset", eval_dataset, "Dataset JSONL")->required();
  c_eval->add_option("outputs", eval_outputs, "Outputs JSONL ({id, response} per line)")->required();
  c_eval->add_option("--model", eval_model, "Model label")->required();
  c_eval->add_option("-o,--output", eval_out, "Score report JSON path (default stdout)");

  // report
  auto* c_report = app.add_subcommand("report", "Render a leaderboard from score reports");
  std::vector<std::string> report_in, report_external;
  std::string report_format = "table", report_out;
  c_report->add_option("reports", report_in, "Score report JSON files")->required();
  c_report->add_option("--format", report_format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  c_report->add_option("--external", report_external, "MODEL=SCORE external benchmark score");
  c_report->add_option("-o,--output", report_out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    ToolkitConfig cfg = config_path.empty() ? ToolkitConfig{} : ToolkitConfig::load(config_path);
    if (seed) cfg.apply_seed(*seed);

    if (*c_import) {
      write_text(import_out, load_tree(import_in).to_json().dump(2) + "\n");
      return 0;
    }

    if (*c_extract) {
      extract_beam.apply(cfg.beam);
      const auto tree = load_tree(extract_tree);
      const auto provider = cfg.make_embedding_provider();
      AssociationContext ctx(tree, cfg.association, *provider);
      auto beam = cfg.beam;
      beam.workers = cfg.workers;
      json out = json::array();
      for (const auto& s : extract_subtrees(tree, beam, ctx)) out.push_back(s.to_json(tree));
      write_text(extract_out, out.dump(2) + "\n");
      return 0;
    }

    if (*c_emit) {
      const auto tree = load_tree(emit_tree);
      const auto doc = read_json(emit_subtree);
      auto emit_one = [&](const json& sj) {
        const auto s = Subtree::from_json(tree, sj);
        const auto schema = emit_schema(s, tree);
        json entry = {{"root_id", tree.id_of(s.root())},
                      {"depth", schema_depth(schema)},
                      {"properties", schema_property_count(schema)},
                      {"schema", schema.to_json()}};
        try {
          entry["difficulty"] = std::string(difficulty_name(grade_difficulty(schema)));
        } catch (const GradingError& e) {
          entry["difficulty"] = nullptr;
          std::cerr << "warning: " << e.what() << "\n";
        }
        return entry;
      };
      json out;
      if (doc.is_array()) {
        out = json::array();
        for (const auto& sj : doc) out.push_back(emit_one(sj));
      } else {
        out = emit_one(doc);
      }
      write_text(emit_out, out.dump(2) + "\n");
      return 0;
    }

    if (*c_gen) {
      gen_beam.apply(cfg.beam);
      std::vector<PropertyTree> trees;
      for (const auto& p : gen_trees) trees.push_back(load_tree(p));
      std::map<std::string, std::string> texts;
      for (const auto& t : gen_texts) {
        auto [domain, path] = split_pair(t, "--text");
        texts[domain] = read_file(path);
      }
      GenerateOptions opts;
      opts.beam = cfg.beam;
      opts.beam.workers = cfg.workers;
      opts.association = cfg.association;
      opts.min_words = cfg.min_words;
      opts.draft_gold = gen_draft;
      const auto provider = cfg.make_embedding_provider();
      const auto result = generate_benchmark(trees, texts, opts, *provider);
      for (const auto& d : result.diagnostics) std::cerr << "generate: " << d << "\n";
      save_dataset(result.instances, gen_out);
      std::map<Difficulty, int> tiers;
      for (const auto& i : result.instances) ++tiers[i.difficulty];
      std::cerr << fmt::format("generate: wrote {} instances ({} Medium, {} Hard), mean {:.1f} properties\n",
                               result.instances.size(), tiers[Difficulty::Medium], tiers[Difficulty::Hard],
                               result.mean_properties);
      return 0;
    }

    if (*c_agg) {
      AggregationJob job;
      for (const auto& p : agg_docs) job.docs.push_back(read_file(p));
      job.language = agg_language.empty() ? detect_script_language(job.docs.front()) : agg_language;
      job.min_words = cfg.min_words;
      const auto prompt = build_aggregation_prompt(job);
      if (agg_prompt_only) {
        write_text(agg_out, prompt);
        return 0;
      }
      std::unique_ptr<CompletionClient> client;
      if (agg_stub) {
        client = std::make_unique<EchoCompletionStub>();
      } else {
        client = std::make_unique<ChatCompletionClient>(cfg.endpoint);
      }
      const auto text = client->complete(prompt);
      write_text(agg_out, text);
      const auto check = length_check(text, cfg.min_words);
      if (!check.pass) {
        std::cerr << fmt::format("aggregate: output has {} words, below the {} word minimum\n", check.words,
                                 cfg.min_words);
        return kExitFindings;
      }
      return 0;
    }

    if (*c_audit) {
      LoadOptions lo;
      lo.min_words = 1;
      lo.allow_pending_gold = true;
      lo.domains = cfg.domains;
      const auto instances = load_dataset(audit_dataset, lo);
      std::map<std::string, std::vector<ConstraintRule>> rules;
      if (!audit_rules.empty()) rules = load_constraint_rules(read_json(audit_rules));
      std::vector<std::string> corpus;
      for (const auto& p : audit_corpus) corpus.push_back(read_file(p));

      std::size_t findings = 0;
      json out = json::array();
      for (const auto& inst : instances) {
        json rec = {{"id", inst.id}};
        json issues = json::array();
        const auto len = length_check(inst.text, cfg.min_words);
        rec["words"] = len.words;
        if (!len.pass) issues.push_back({{"guard", "length"}, {"message", fmt::format("{} words", len.words)}});
        if (inst.gold.is_null()) {
          issues.push_back({{"guard", "gold"}, {"message", "gold pending annotation"}});
        } else {
          for (const auto& v : validate_instance(inst.schema, inst.gold).violations) {
            issues.push_back({{"guard", "schema"}, {"path", v.path}, {"message", v.message}});
          }
          for (const auto& p : grounding_probe(inst.gold, inst.text)) {
            issues.push_back({{"guard", "grounding"}, {"path", p}, {"message", "value not found in text"}});
          }
          if (auto it = rules.find(inst.domain); it != rules.end()) {
            for (const auto& p : unresolved_rule_paths(it->second, inst.schema)) {
              rec.emplace("skipped_rule_paths", json::array()).first->push_back(p);
            }
            for (const auto& v : constraint_check(inst.gold, it->second)) {
              issues.push_back({{"guard", "constraint"}, {"path", v.path}, {"message", v.message}});
            }
          }
        }
        if (!corpus.empty()) {
          for (const auto& f : leakage_scan(inst.text, corpus, cfg.leakage)) {
            if (!f.flagged) continue;
            json li = {{"guard", "leakage"},
                       {"corpus", audit_corpus[f.corpus_index]},
                       {"estimate", f.estimate}};
            if (f.exact) li["exact"] = *f.exact;
            issues.push_back(li);
          }
        }
        findings += issues.size();
        rec["issues"] = issues;
        out.push_back(rec);
      }
      write_text(audit_out, out.dump(2) + "\n");
      std::cerr << fmt::format("audit: {} instances, {} findings\n", instances.size(), findings);
      return findings ? kExitFindings : 0;
    }

    if (*c_eval) {
      LoadOptions lo;
      lo.min_words = cfg.min_words;
      lo.domains = cfg.domains;
      const auto instances = load_dataset(eval_dataset, lo);
      const auto outputs = load_outputs(eval_outputs);
      RunOptions ro;
      ro.eval = cfg.evaluator;
      ro.workers = cfg.workers;
      const auto report = run_eval(eval_model, instances, outputs, ro);
      write_text(eval_out, report.to_json().dump(2) + "\n");
      std::cerr << fmt::format("eval: {} syntax {:.2f} key {:.2f} strict {:.2f}\n", eval_model,
                               report.overall.syntax, report.overall.key, report.overall.strict);
      return 0;
    }

    if (*c_report) {
      std::vector<ScoreReport> reports;
      for (const auto& p : report_in) reports.push_back(ScoreReport::from_json(read_json(p)));
      ReportOptions ro;
      for (const auto& e : report_external) {
        auto [model, value] = split_pair(e, "--external");
        try {
          ro.external_scores[model] = std::stod(value);
        } catch (const std::exception&) {
          throw ArgumentError("--external score is not a number: " + value);
        }
      }
      const auto fmt_kind = report_format == "json" ? ReportFormat::Json : ReportFormat::Table;
      write_text(report_out, render_report(reports, fmt_kind, ro));
      return 0;
    }
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
