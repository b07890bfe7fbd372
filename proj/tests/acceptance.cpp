#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "harness_fixtures.hpp"
#include "nestbench/error.hpp"

using namespace nestbench;
using namespace testsupport;

namespace {

constexpr double kOracleTol = 1e-12;
constexpr double kDepthRewardTol = 1e-6;
constexpr double kDistanceTol = 1e-4;
constexpr double kPathValueTol = 1e-9;
constexpr double kPearsonTol = 1e-12;
constexpr double kHierarchySeconds = 10.0;
constexpr double kBeamSeconds = 60.0;
constexpr double kSmokeSeconds = 30.0;

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  %-22s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

class TableScorer final : public PairScorer {
 public:
  void set(NodeIndex u, NodeIndex v, double x) { table_[{std::min(u, v), std::max(u, v)}] = x; }
  double assoc(NodeIndex u, NodeIndex v) const override {
    auto it = table_.find({std::min(u, v), std::max(u, v)});
    return it == table_.end() ? 0.0 : it->second;
  }

 private:
  std::map<std::pair<NodeIndex, NodeIndex>, double> table_;
};

double closed_form_r(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Depth straight from the emitted JSON Schema document.
int json_schema_depth(const json& s) {
  int below = 0;
  if (s.contains("properties"))
    for (const auto& [k, v] : s["properties"].items()) below = std::max(below, json_schema_depth(v));
  if (s.contains("items")) below = std::max(below, json_schema_depth(s["items"]));
  return 1 + below;
}

void score_hierarchy() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  auto xs = synthetic_instances(40, 77, 20);
  int violations = 0, strict_hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& x = xs[static_cast<std::size_t>(i) % xs.size()];
    std::string raw;
    switch (rng() % 5) {
      case 0: raw = x.gold.dump(); break;
      case 1: raw = "Here you go:\n```json\n" + x.gold.dump(2) + "\n```"; break;
      case 2: raw = perturb(rng, x.gold).dump(); break;
      case 3: raw = x.gold.dump() + "\n, {\"extra\": 1}"; break;
      default: raw = random_json(rng, 3).dump(); break;
    }
    auto s = score_response(raw, x.gold, x.schema);
    if (s.strict == 1) {
      ++strict_hits;
      if (s.key != 1.0 || s.syntax != 1) ++violations;
    }
  }
  const double secs = seconds_since(t0);
  report("score-hierarchy", violations == 0 && strict_hits > 0 && secs < kHierarchySeconds,
         fmt::format("1000 pairs, {} strict hits, {} violations, {:.2f}s (limit {}s)", strict_hits,
                     violations, secs, kHierarchySeconds));
}

void evaluator_oracle() {
  std::mt19937_64 rng(99);
  double worst = 0;
  for (int i = 0; i < 500; ++i) {
    json a = random_json(rng, 4);
    json b = rng() % 3 == 0 ? random_json(rng, 4) : perturb(rng, a);
    worst = std::max(worst, std::abs(key_matching_score(a, b) - naive_key_score(a, b)));
  }
  report("evaluator-oracle", worst <= kOracleTol,
         fmt::format("500 pairs, max |diff| {:.3g} (tol {:g})", worst, kOracleTol));
}

BeamConfig random_config(std::mt19937_64& rng) {
  BeamConfig c;
  c.d_min = 1 + static_cast<int>(rng() % 4);
  c.d_max = c.d_min + static_cast<int>(rng() % 4);
  c.n_min = 1 + static_cast<int>(rng() % 8);
  c.n_max = c.n_min + static_cast<int>(rng() % 8);
  c.top_k = 1 + static_cast<int>(rng() % 4);
  c.gamma = 0.1 + 0.9 * static_cast<double>(rng() % 10) / 9.0;
  c.alpha_delta = 0.5 + static_cast<double>(rng() % 4) / 2.0;
  c.lambda_d = static_cast<double>(rng() % 3) / 2.0;
  c.lambda_n = static_cast<double>(rng() % 3) / 2.0;
  c.eta = static_cast<double>(rng() % 3);
  return c;
}

void beam_feasibility() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(31337);
  HashedBagOfWords provider;
  std::size_t checked = 0;
  int violations = 0;
  for (int tree_i = 0; tree_i < 200; ++tree_i) {
    auto t = random_tree(rng, 1 + static_cast<int>(rng() % 15));
    AssociationContext ctx(t, AssocConfig{}, provider);
    auto all = enumerate_connected_subtrees(t, 64, 64);
    for (int c = 0; c < 20; ++c) {
      auto cfg = random_config(rng);
      for (const auto& s : extract_subtrees(t, cfg, ctx)) {
        ++checked;
        const int d = s.depth(), n = static_cast<int>(s.size());
        const bool in_windows = d >= cfg.d_min && d <= cfg.d_max && n >= cfg.n_min && n <= cfg.n_max;
        if (!in_windows || all.count(s) == 0) ++violations;
      }
    }
  }
  const double secs = seconds_since(t0);
  report("beam-feasibility", violations == 0 && checked > 0 && secs < kBeamSeconds,
         fmt::format("200 trees x 20 configs, {} subtrees, {} violations, {:.2f}s (limit {}s)", checked,
                     violations, secs, kBeamSeconds));
}

void appendix_fixtures() {
  LoadOptions lo;
  lo.min_words = 1;
  auto xs = load_dataset(data_path("fixtures/appendix.jsonl"), lo);
  auto outs = load_outputs(data_path("fixtures/appendix_outputs.jsonl"));
  auto rep = run_eval("appendix", xs, outs);
  const auto& hard = rep.per_instance.at(0).scores;
  const auto& med = rep.per_instance.at(1).scores;

  auto hard_cand = find_json_candidate(outs.at(0).response);
  const double hard_oracle = hard_cand ? naive_key_score(hard_cand->value, xs[0].gold) : -1;
  const auto med_value = json::parse(outs.at(1).response);
  const double med_oracle = naive_key_score(med_value, xs[1].gold);
  auto v = validate_instance(xs[1].schema, med_value);
  const bool one_type = v.violations.size() == 1 && v.violations[0].kind == ViolationKind::Type &&
                        v.violations[0].path == "Ratings.1.Score";

  const bool ok = hard.syntax == 0 && hard.strict == 0 && std::abs(hard.key - hard_oracle) <= kOracleTol &&
                  std::abs(hard_oracle - 7.0 / 13.0) <= kOracleTol && med.strict == 0 && one_type &&
                  std::abs(med.key - med_oracle) <= kOracleTol &&
                  std::abs(med_oracle - 10.0 / 12.0) <= kOracleTol;
  report("appendix-fixtures", ok,
         fmt::format("hard syntax={} strict={} key={:.6f} (oracle 7/13); medium strict={} key={:.6f} "
                     "(oracle 10/12), type violation at Ratings.1.Score: {}",
                     hard.syntax, hard.strict, hard.key, med.strict, med.key, one_type ? "yes" : "no"));
}

void difficulty_grading() {
  std::mt19937_64 rng(555);
  std::map<int, int> by_depth;
  int graded = 0, wrong = 0;
  // 20 schemas at each depth 3..7
  for (int target = 3; target <= 7; ++target) {
    while (by_depth[target] < 20) {
      auto t = random_tree(rng, 6 + static_cast<int>(rng() % 10));
      for (const auto& s : enumerate_connected_subtrees(t, target, 12)) {
        if (by_depth[target] >= 20) break;
        if (rng() % 4 != 0) continue;
        SchemaDoc doc;
        try {
          doc = emit_schema(s, t);
        } catch (const EmissionError&) {
          continue;
        }
        const int d = json_schema_depth(doc.to_json());
        if (d != target) continue;
        ++by_depth[d];
        ++graded;
        Difficulty want = d <= 4 ? Difficulty::Medium : Difficulty::Hard;
        try {
          if (grade_difficulty(doc) != want) ++wrong;
        } catch (const GradingError&) {
          ++wrong;
        }
      }
    }
  }
  auto deep = chain(8);
  Subtree whole(deep.root());
  for (NodeIndex i = 1; i < deep.size(); ++i) whole.add_edge(i - 1, i);
  auto deep_doc = emit_schema(whole, deep);
  bool rejected = false;
  try {
    grade_difficulty(deep_doc);
  } catch (const GradingError& e) {
    rejected = e.depth == 8;
  }
  std::string mix;
  for (const auto& [d, n] : by_depth) mix += fmt::format(" d{}:{}", d, n);
  report("difficulty-grading", wrong == 0 && rejected && graded == 100,
         fmt::format("{} schemas ({} ), {} misgraded, depth 8 rejected: {}", graded, mix, wrong,
                     rejected ? "yes" : "no"));
}

void formula_spot_values() {
  BeamConfig cfg;
  cfg.d_min = 3;
  cfg.d_max = 7;
  cfg.epsilon = 1e-9;
  const double rd = reward_depth(2, cfg);
  const double dp = distance_penalty(2, 0.5);

  auto t = chain(3);
  TableScorer sc;
  sc.set(t.index_of("a"), t.index_of("b"), 0.5);
  BeamConfig pv_cfg;
  pv_cfg.d_min = 1;
  pv_cfg.d_max = 3;
  pv_cfg.n_min = 1;
  pv_cfg.n_max = 3;
  pv_cfg.alpha_delta = 1.0;
  pv_cfg.gamma = 0.9;
  pv_cfg.lambda_d = pv_cfg.lambda_n = 0.5;
  auto pv = path_value(CandidatePath{{t.index_of("b")}}, Subtree(t.root()), t, pv_cfg, sc);

  const bool ok = std::abs(rd - 0.75) <= kDepthRewardTol && std::abs(dp - 0.3679) <= kDistanceTol &&
                  pv.feasible && std::abs(pv.value - 1.5) <= kPathValueTol;
  report("formula-spot-values", ok,
         fmt::format("reward_depth={:.9f} distance_penalty={:.6f} path_value={:.12f}", rd, dp, pv.value));
}

void pearson_checks() {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> g(0, 5);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 3 + rng() % 60;
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = g(rng);
      y[k] = (rng() % 2 ? 1 : -1) * 0.3 * x[k] + g(rng);
    }
    worst = std::max(worst, std::abs(pearson(x, y).r - closed_form_r(x, y)));
  }
  const double up = pearson({1, 2, 3, 4}, {3, 5, 7, 9}).r;
  const double down = pearson({1, 2, 3, 4}, {-2, -4, -6, -8}).r;
  const double ext = pearson({97.36, 91.87, 83.26}, {90.73, 88.15, 80.18}).r;
  const bool ok = worst <= kPearsonTol && std::abs(up - 1) <= kPearsonTol && std::abs(down + 1) <= kPearsonTol;
  report("pearson", ok,
         fmt::format("100 vectors max |diff| {:.3g}; linear +{:.15f} / {:.15f}; three-model example r={:.3f}",
                     worst, up, down, ext));
}

void minhash_accuracy() {
  std::mt19937_64 rng(8080);
  MinHasher mh(128, LeakageOptions{}.seed);
  double total = 0;
  for (int i = 0; i < 100; ++i) {
    // Shared body plus private tails gives overlap spread over [0, 1].
    const std::size_t shared = rng() % 300, own_a = 1 + rng() % 200, own_b = 1 + rng() % 200;
    std::string a, b;
    for (std::size_t k = 0; k < shared; ++k) {
      auto w = "s" + std::to_string(rng() % 5000) + " ";
      a += w;
      b += w;
    }
    for (std::size_t k = 0; k < own_a; ++k) a += "a" + std::to_string(rng() % 5000) + " ";
    for (std::size_t k = 0; k < own_b; ++k) b += "b" + std::to_string(rng() % 5000) + " ";
    auto sa = word_shingles(a, 3), sb = word_shingles(b, 3);
    total += std::abs(MinHasher::estimate(mh.signature(sa), mh.signature(sb)) - exact_jaccard(sa, sb));
  }
  const double mae = total / 100.0, bound = 3.0 / std::sqrt(128.0);
  report("minhash-accuracy", mae <= bound, fmt::format("MAE {:.4f} (bound {:.4f})", mae, bound));
}

void round_trip() {
  auto xs = synthetic_instances(50, 1234, 1500);
  const auto dir = std::filesystem::temp_directory_path() / "nestbench-acceptance";
  std::filesystem::create_directories(dir);
  const auto first = (dir / "a.jsonl").string(), second = (dir / "b.jsonl").string();
  save_dataset(xs, first);
  auto back = load_dataset(first);
  save_dataset(back, second);
  const bool identical = slurp(first) == slurp(second) && back.size() == 50;
  int invalid = 0;
  for (const auto& x : back)
    if (!validate_instance(x.schema, x.gold).pass) ++invalid;
  std::filesystem::remove_all(dir);
  report("round-trip", identical && invalid == 0,
         fmt::format("50 instances, byte-identical: {}, invalid golds: {}", identical ? "yes" : "no", invalid));
}

void end_to_end() {
  auto t0 = std::chrono::steady_clock::now();
  auto tree = PropertyTree::from_nested_json(json::parse(slurp(data_path("toy/vehicles.tree.json"))));
  std::map<std::string, std::string> texts{{tree.domain(), slurp(data_path("toy/vehicles.txt"))}};
  GenerateOptions opts;
  opts.draft_gold = true;
  HashedBagOfWords provider;
  auto res = generate_benchmark({tree}, texts, opts, provider);
  std::set<Difficulty> tiers;
  std::vector<ModelOutput> outs;
  for (const auto& x : res.instances) {
    tiers.insert(x.difficulty);
    outs.push_back({x.id, x.gold.dump(2)});
  }
  auto rep = run_eval("gold", res.instances, outs);
  const double secs = seconds_since(t0);
  const bool ok = tree.height() >= 5 && res.instances.size() >= 3 && tiers.size() == 2 &&
                  rep.overall.syntax == 100.0 && rep.overall.key == 100.0 && rep.overall.strict == 100.0 &&
                  secs < kSmokeSeconds;
  report("end-to-end-smoke", ok,
         fmt::format("tree height {}, {} instances, {} tiers, scores {:.2f}/{:.2f}/{:.2f}, {:.2f}s (limit {}s)",
                     tree.height(), res.instances.size(), tiers.size(), rep.overall.syntax, rep.overall.key,
                     rep.overall.strict, secs, kSmokeSeconds));
}

void guarded(const std::string& name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded("score-hierarchy", score_hierarchy);
  guarded("evaluator-oracle", evaluator_oracle);
  guarded("beam-feasibility", beam_feasibility);
  guarded("appendix-fixtures", appendix_fixtures);
  guarded("difficulty-grading", difficulty_grading);
  guarded("formula-spot-values", formula_spot_values);
  guarded("pearson", pearson_checks);
  guarded("minhash-accuracy", minhash_accuracy);
  guarded("round-trip", round_trip);
  guarded("end-to-end-smoke", end_to_end);
  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
