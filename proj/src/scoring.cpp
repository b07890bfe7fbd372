#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "nestbench/error.hpp"
#include "nestbench/harness.hpp"

namespace nestbench {

namespace {

ElementType parse_element_type(std::string_view s) {
  for (auto t : {ElementType::String, ElementType::Number, ElementType::Boolean, ElementType::Enum,
                 ElementType::StringList, ElementType::NumberList, ElementType::ObjectList}) {
    if (element_type_name(t) == s) return t;
  }
  throw InputError("unknown element type '" + std::string(s) + "'");
}

nlohmann::json aggregate_json(const Aggregate& a) {
  return {{"count", a.count}, {"syntax", a.syntax}, {"key", a.key}, {"strict", a.strict}};
}

Aggregate aggregate_from_json(const nlohmann::json& j) {
  return {j.at("count").get<std::size_t>(), j.at("syntax").get<double>(), j.at("key").get<double>(),
          j.at("strict").get<double>()};
}

nlohmann::json correlation_json(const std::optional<Correlation>& c) {
  if (!c) return nullptr;
  return {{"r", c->r}, {"r2", c->r2}};
}

std::optional<Correlation> correlation_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return Correlation{j.at("r").get<double>(), j.at("r2").get<double>()};
}

std::optional<Correlation> try_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return pearson(x, y);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::pair<double, double> mean_stddev(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::string pct(double x) { return fmt::format("{:.2f}", x); }

}  // namespace

Aggregate aggregate(const std::vector<InstanceResult>& results) {
  Aggregate a;
  a.count = results.size();
  if (results.empty()) return a;
  double syn = 0, key = 0, strict = 0;
  for (const auto& r : results) {
    syn += r.scores.syntax;
    key += r.scores.key;
    strict += r.scores.strict;
  }
  const auto n = static_cast<double>(results.size());
  a.syntax = 100.0 * syn / n;
  a.key = 100.0 * key / n;
  a.strict = 100.0 * strict / n;
  return a;
}

std::map<Difficulty, PromptLengthStats> prompt_length_stats(const std::vector<EvalInstance>& instances) {
  std::map<Difficulty, std::pair<std::vector<double>, std::vector<double>>> samples;
  for (const auto& inst : instances) {
    const auto prompt = build_extraction_prompt(inst);
    auto& [words, chars] = samples[inst.difficulty];
    words.push_back(static_cast<double>(word_count(prompt)));
    chars.push_back(static_cast<double>(prompt.size()));
  }
  std::map<Difficulty, PromptLengthStats> out;
  for (const auto& [d, wc] : samples) {
    PromptLengthStats s;
    s.count = wc.first.size();
    std::tie(s.mean_words, s.stddev_words) = mean_stddev(wc.first);
    std::tie(s.mean_chars, s.stddev_chars) = mean_stddev(wc.second);
    out[d] = s;
  }
  return out;
}

ScoreReport run_eval(const std::string& model, const std::vector<EvalInstance>& instances,
                     const std::vector<ModelOutput>& outputs, const RunOptions& options) {
  std::unordered_map<std::string, const std::string*> by_id;
  for (const auto& o : outputs) {
    if (!by_id.emplace(o.id, &o.response).second) throw InputError("duplicate output id " + o.id);
  }

  ScoreReport rep;
  rep.model = model;
  rep.per_instance.resize(instances.size());
  std::vector<std::map<ElementType, TypeTally>> tallies(instances.size());

  auto score_one = [&](std::size_t i) {
    const auto& inst = instances[i];
    auto& r = rep.per_instance[i];
    r.id = inst.id;
    r.domain = inst.domain;
    r.difficulty = inst.difficulty;
    auto it = by_id.find(inst.id);
    if (it == by_id.end()) {
      r.missing_output = true;
      tallies[i] = per_type_tally(nullptr, inst.gold, inst.schema);
      return;
    }
    const std::string& response = *it->second;
    r.response_words = word_count(response);
    r.response_chars = response.size();
    r.scores = score_response(response, inst.gold, inst.schema, options.eval);
    auto cand = find_json_candidate(response);
    tallies[i] = per_type_tally(cand ? &cand->value : nullptr, inst.gold, inst.schema);
  };

  const auto workers = static_cast<std::size_t>(std::max(1, options.workers));
  if (workers == 1 || instances.size() < 2) {
    for (std::size_t i = 0; i < instances.size(); ++i) score_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < std::min(workers, instances.size()); ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < instances.size(); i = next++) score_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  rep.overall = aggregate(rep.per_instance);
  std::map<Difficulty, std::vector<InstanceResult>> split;
  std::map<std::string, std::map<Difficulty, std::vector<double>>> domain_keys;
  for (const auto& r : rep.per_instance) {
    split[r.difficulty].push_back(r);
    domain_keys[r.domain][r.difficulty].push_back(r.scores.key);
  }
  for (const auto& [d, rs] : split) rep.by_difficulty[d] = aggregate(rs);
  for (const auto& [dom, per_d] : domain_keys) {
    for (const auto& [d, keys] : per_d) rep.per_domain[dom][d] = 100.0 * mean_stddev(keys).first;
  }
  for (const auto& t : tallies) {
    for (const auto& [type, c] : t) {
      rep.per_type[type].credited += c.credited;
      rep.per_type[type].total += c.total;
    }
  }
  std::vector<double> lengths, keys, stricts;
  for (const auto& r : rep.per_instance) {
    if (r.missing_output) continue;
    lengths.push_back(static_cast<double>(r.response_words));
    keys.push_back(r.scores.key);
    stricts.push_back(r.scores.strict);
  }
  rep.length.key = try_pearson(lengths, keys);
  rep.length.strict = try_pearson(lengths, stricts);
  rep.prompt_lengths = prompt_length_stats(instances);
  return rep;
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("pearson inputs differ in length");
  if (x.size() < 2) throw ArgumentError("pearson needs at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw CorrelationError("correlation undefined: zero variance");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return {r, r * r};
}

nlohmann::json ScoreReport::to_json() const {
  nlohmann::json inst = nlohmann::json::array();
  for (const auto& r : per_instance) {
    inst.push_back({{"id", r.id},
                    {"domain", r.domain},
                    {"difficulty", std::string(difficulty_name(r.difficulty))},
                    {"syntax", r.scores.syntax},
                    {"key", r.scores.key},
                    {"strict", r.scores.strict},
                    {"parsed", r.scores.parsed},
                    {"missing_output", r.missing_output},
                    {"response_words", r.response_words},
                    {"response_chars", r.response_chars}});
  }
  nlohmann::json diff = nlohmann::json::object();
  for (const auto& [d, a] : by_difficulty) diff[std::string(difficulty_name(d))] = aggregate_json(a);
  nlohmann::json dom = nlohmann::json::object();
  for (const auto& [name, per_d] : per_domain) {
    for (const auto& [d, k] : per_d) dom[name][std::string(difficulty_name(d))] = k;
  }
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [t, c] : per_type) {
    types[std::string(element_type_name(t))] = {
        {"credited", c.credited},
        {"total", c.total},
        {"accuracy", c.total ? static_cast<double>(c.credited) / static_cast<double>(c.total) : 0.0}};
  }
  nlohmann::json prompts = nlohmann::json::object();
  for (const auto& [d, s] : prompt_lengths) {
    prompts[std::string(difficulty_name(d))] = {{"count", s.count},
                                               {"mean_words", s.mean_words},
                                               {"stddev_words", s.stddev_words},
                                               {"mean_chars", s.mean_chars},
                                               {"stddev_chars", s.stddev_chars}};
  }
  return {{"model", model},
          {"overall", aggregate_json(overall)},
          {"by_difficulty", diff},
          {"per_domain", dom},
          {"per_type", types},
          {"length_correlation", {{"key", correlation_json(length.key)},
                                  {"strict", correlation_json(length.strict)}}},
          {"prompt_lengths", prompts},
          {"per_instance", inst}};
}

ScoreReport ScoreReport::from_json(const nlohmann::json& j) {
  try {
    ScoreReport rep;
    rep.model = j.at("model").get<std::string>();
    rep.overall = aggregate_from_json(j.at("overall"));
    for (const auto& [d, a] : j.at("by_difficulty").items()) {
      rep.by_difficulty[parse_difficulty(d)] = aggregate_from_json(a);
    }
    for (const auto& [name, per_d] : j.at("per_domain").items()) {
      for (const auto& [d, k] : per_d.items()) rep.per_domain[name][parse_difficulty(d)] = k.get<double>();
    }
    for (const auto& [t, c] : j.at("per_type").items()) {
      rep.per_type[parse_element_type(t)] = {c.at("credited").get<std::size_t>(),
                                             c.at("total").get<std::size_t>()};
    }
    rep.length.key = correlation_from_json(j.at("length_correlation").at("key"));
    rep.length.strict = correlation_from_json(j.at("length_correlation").at("strict"));
    for (const auto& [d, s] : j.at("prompt_lengths").items()) {
      rep.prompt_lengths[parse_difficulty(d)] = {s.at("count").get<std::size_t>(),
                                                 s.at("mean_words").get<double>(),
                                                 s.at("stddev_words").get<double>(),
                                                 s.at("mean_chars").get<double>(),
                                                 s.at("stddev_chars").get<double>()};
    }
    for (const auto& r : j.at("per_instance")) {
      InstanceResult ir;
      ir.id = r.at("id").get<std::string>();
      ir.domain = r.at("domain").get<std::string>();
      ir.difficulty = parse_difficulty(r.at("difficulty").get<std::string>());
      ir.scores.syntax = r.at("syntax").get<int>();
      ir.scores.key = r.at("key").get<double>();
      ir.scores.strict = r.at("strict").get<int>();
      ir.scores.parsed = r.value("parsed", false);
      ir.missing_output = r.value("missing_output", false);
      ir.response_words = r.value("response_words", std::size_t{0});
      ir.response_chars = r.value("response_chars", std::size_t{0});
      rep.per_instance.push_back(std::move(ir));
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed score report: ") + e.what());
  }
}

std::vector<const ScoreReport*> rank_reports(const std::vector<ScoreReport>& reports) {
  std::vector<const ScoreReport*> out;
  for (const auto& r : reports) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const ScoreReport* a, const ScoreReport* b) {
    if (a->overall.key != b->overall.key) return a->overall.key > b->overall.key;
    return a->model < b->model;
  });
  return out;
}

std::string render_report(const std::vector<ScoreReport>& reports, ReportFormat format,
                          const ReportOptions& options) {
  if (reports.empty()) throw ArgumentError("report needs at least one score report");
  const auto ranked = rank_reports(reports);

  std::optional<Correlation> external;
  std::vector<std::string> external_models;
  {
    std::vector<double> xs, ys;
    for (const auto* r : ranked) {
      auto it = options.external_scores.find(r->model);
      if (it == options.external_scores.end()) continue;
      external_models.push_back(r->model);
      xs.push_back(it->second);
      ys.push_back(r->overall.key);
    }
    if (!options.external_scores.empty()) external = try_pearson(xs, ys);
  }

  if (format == ReportFormat::Json) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto* r : ranked) {
      auto j = r->to_json();
      j.erase("per_instance");
      j.erase("prompt_lengths");
      if (r->by_difficulty.count(Difficulty::Medium) && r->by_difficulty.count(Difficulty::Hard)) {
        const auto& m = r->by_difficulty.at(Difficulty::Medium);
        const auto& h = r->by_difficulty.at(Difficulty::Hard);
        j["difficulty_delta"] = {{"syntax", m.syntax - h.syntax},
                                 {"key", m.key - h.key},
                                 {"strict", m.strict - h.strict}};
      }
      models.push_back(std::move(j));
    }
    nlohmann::json doc = {{"models", models}};
    nlohmann::json prompts = ranked.front()->to_json()["prompt_lengths"];
    doc["prompt_lengths"] = prompts;
    if (!options.external_scores.empty()) {
      doc["external_validity"] = {{"models", external_models},
                                  {"correlation", correlation_json(external)}};
    }
    return doc.dump(2) + "\n";
  }

  std::string out;
  auto agg_cells = [](const std::map<Difficulty, Aggregate>& m, Difficulty d) {
    auto it = m.find(d);
    if (it == m.end()) return fmt::format(" {:>7} {:>7} {:>7}", "-", "-", "-");
    return fmt::format(" {:>7} {:>7} {:>7}", pct(it->second.syntax), pct(it->second.key),
                       pct(it->second.strict));
  };
  std::size_t width = 5;
  for (const auto* r : ranked) width = std::max(width, r->model.size());

  out += "Leaderboard (percent)\n";
  out += fmt::format("{:<{}} | {:^23} | {:^23} | {:^23}\n", "Model", width, "Overall", "Medium", "Hard");
  out += fmt::format("{:<{}} | {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}\n", "", width,
                     "Syntax", "Key", "Strict", "Syntax", "Key", "Strict", "Syntax", "Key", "Strict");
  for (const auto* r : ranked) {
    out += fmt::format("{:<{}} | {:>7} {:>7} {:>7} |{} |{}\n", r->model, width, pct(r->overall.syntax),
                       pct(r->overall.key), pct(r->overall.strict),
                       agg_cells(r->by_difficulty, Difficulty::Medium),
                       agg_cells(r->by_difficulty, Difficulty::Hard));
  }

  out += "\nMedium minus Hard (percentage points)\n";
  for (const auto* r : ranked) {
    if (!r->by_difficulty.count(Difficulty::Medium) || !r->by_difficulty.count(Difficulty::Hard)) {
      out += fmt::format("{:<{}}  n/a\n", r->model, width);
      continue;
    }
    const auto& m = r->by_difficulty.at(Difficulty::Medium);
    const auto& h = r->by_difficulty.at(Difficulty::Hard);
    out += fmt::format("{:<{}}  syntax {:+.2f}  key {:+.2f}  strict {:+.2f}\n", r->model, width,
                       m.syntax - h.syntax, m.key - h.key, m.strict - h.strict);
  }

  out += "\nKey score by domain (Medium / Hard)\n";
  for (const auto* r : ranked) {
    out += r->model + "\n";
    for (const auto& [dom, per_d] : r->per_domain) {
      auto cell = [&](Difficulty d) {
        auto it = per_d.find(d);
        return it == per_d.end() ? std::string("-") : pct(it->second);
      };
      out += fmt::format("  {:<30} {:>7} / {:>7}\n", dom, cell(Difficulty::Medium), cell(Difficulty::Hard));
    }
  }

  out += "\nAccuracy by element type\n";
  for (const auto* r : ranked) {
    out += r->model + "\n";
    for (const auto& [t, c] : r->per_type) {
      const double acc = c.total ? static_cast<double>(c.credited) / static_cast<double>(c.total) : 0.0;
      out += fmt::format("  {:<12} {:.3f}  ({}/{})\n", element_type_name(t), acc, c.credited, c.total);
    }
  }

  out += "\nResponse length vs score (Pearson r, R^2)\n";
  for (const auto* r : ranked) {
    auto cell = [](const std::optional<Correlation>& c) {
      return c ? fmt::format("r={:.3f} R2={:.3f}", c->r, c->r2) : std::string("undefined");
    };
    out += fmt::format("{:<{}}  key: {}  strict: {}\n", r->model, width, cell(r->length.key),
                       cell(r->length.strict));
  }

  out += "\nPrompt length (whitespace tokens / characters)\n";
  for (const auto& [d, s] : ranked.front()->prompt_lengths) {
    out += fmt::format("  {:<6} n={:<5} words {:.1f} +/- {:.1f}  chars {:.1f} +/- {:.1f}\n",
                       difficulty_name(d), s.count, s.mean_words, s.stddev_words, s.mean_chars,
                       s.stddev_chars);
  }

  if (!options.external_scores.empty()) {
    out += "\nExternal validity\n";
    if (external) {
      out += fmt::format("  Pearson r between external scores and overall key score: {:.3f} (n={})\n",
                         external->r, external_models.size());
    } else {
      out += fmt::format("  correlation undefined (n={})\n", external_models.size());
    }
  }
  return out;
}

}  // namespace nestbench
