#include "nestbench/beam.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "nestbench/error.hpp"

namespace nestbench {

void BeamConfig::validate() const {
  if (d_min < 1 || n_min < 1) throw ConfigError("beam lower bounds must be positive");
  if (d_min > d_max) throw ConfigError("beam d_min exceeds d_max");
  if (n_min > n_max) throw ConfigError("beam n_min exceeds n_max");
  if (top_k < 1) throw ConfigError("beam top_k must be at least 1");
  if (!(gamma > 0 && gamma <= 1)) throw ConfigError("beam gamma must lie in (0, 1]");
  if (!(alpha_delta > 0)) throw ConfigError("beam alpha_delta must be positive");
  if (lambda_d < 0 || lambda_n < 0 || eta < 0) {
    throw ConfigError("beam weights lambda_d, lambda_n and eta must be non-negative");
  }
  if (!(epsilon > 0)) throw ConfigError("beam epsilon must be positive");
  if (workers < 1) throw ConfigError("beam workers must be at least 1");
}

BeamConfig BeamConfig::from_json(const nlohmann::json& j) {
  BeamConfig c;
  c.d_min = j.value("d_min", c.d_min);
  c.d_max = j.value("d_max", c.d_max);
  c.n_min = j.value("n_min", c.n_min);
  c.n_max = j.value("n_max", c.n_max);
  c.top_k = j.value("top_k", c.top_k);
  c.gamma = j.value("gamma", c.gamma);
  c.alpha_delta = j.value("alpha_delta", c.alpha_delta);
  c.lambda_d = j.value("lambda_d", c.lambda_d);
  c.lambda_n = j.value("lambda_n", c.lambda_n);
  c.eta = j.value("eta", c.eta);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.workers = j.value("workers", c.workers);
  c.validate();
  return c;
}

nlohmann::json BeamConfig::to_json() const {
  return {{"d_min", d_min},         {"d_max", d_max},   {"n_min", n_min},
          {"n_max", n_max},         {"top_k", top_k},   {"gamma", gamma},
          {"alpha_delta", alpha_delta}, {"lambda_d", lambda_d}, {"lambda_n", lambda_n},
          {"eta", eta},             {"epsilon", epsilon}, {"workers", workers}};
}

double corr(NodeIndex u, const std::set<NodeIndex>& members, const PairScorer& scorer) {
  if (members.empty()) throw StructuralError("correlation against an empty subtree");
  double best = 0.0;
  for (NodeIndex v : members) best = std::max(best, scorer.assoc(u, v));
  return best;
}

double corr(NodeIndex u, const Subtree& s, const PairScorer& scorer) {
  return corr(u, s.members(), scorer);
}

double marginal(NodeIndex u, const Subtree& s, const BeamConfig& cfg, const PairScorer& scorer) {
  return cfg.alpha_delta * corr(u, s, scorer);
}

double window_reward(int x, int lo, int hi, double epsilon) {
  const int clipped = std::min(std::max(x, lo), hi);
  return 1.0 - std::abs(clipped - x) / (static_cast<double>(hi - lo) + epsilon);
}

double reward_depth(int d_new, const BeamConfig& cfg) {
  return window_reward(d_new, cfg.d_min, cfg.d_max, cfg.epsilon);
}

double reward_size(int n_new, const BeamConfig& cfg) {
  return window_reward(n_new, cfg.n_min, cfg.n_max, cfg.epsilon);
}

int penalty(const CandidatePath& p, const Subtree& s, const PropertyTree& tree) {
  if (p.nodes.empty()) return 0;
  int violations = 0;
  const NodeIndex head = p.nodes.front();
  const bool in_frontier = head < tree.size() && !s.contains(head) &&
                           tree.node(head).parent && s.contains(*tree.node(head).parent);
  if (!in_frontier) ++violations;
  for (std::size_t i = 1; i < p.nodes.size(); ++i) {
    if (!tree.has_edge(p.nodes[i - 1], p.nodes[i])) ++violations;
  }
  return violations;
}

bool feasible(int d_new, int n_new, const BeamConfig& cfg) {
  return d_new <= cfg.d_max && n_new <= cfg.n_max;
}

AugmentShape augmented_shape(const CandidatePath& p, const Subtree& s, const PropertyTree& tree) {
  std::set<NodeIndex> fresh;
  for (NodeIndex u : p.nodes) {
    if (!s.contains(u)) fresh.insert(u);
  }
  AugmentShape shape;
  shape.size = static_cast<int>(s.size() + fresh.size());
  int base = s.depth();
  if (!p.nodes.empty() && p.nodes.front() < tree.size()) {
    const auto& parent = tree.node(p.nodes.front()).parent;
    if (parent && s.contains(*parent)) base = s.level_of(*parent);
  }
  shape.depth = std::max(s.depth(), base + static_cast<int>(p.nodes.size()));
  return shape;
}

PathValue path_value(const CandidatePath& p, const Subtree& s, const PropertyTree& tree,
                     const BeamConfig& cfg, const PairScorer& scorer) {
  const auto shape = augmented_shape(p, s, tree);
  if (!feasible(shape.depth, shape.size, cfg)) return PathValue::rejected();

  std::set<NodeIndex> grown = s.members();
  double gain = 0.0;
  double discount = 1.0;
  for (NodeIndex u : p.nodes) {
    gain += discount * cfg.alpha_delta * corr(u, grown, scorer);
    grown.insert(u);
    discount *= cfg.gamma;
  }
  const double value = gain + cfg.lambda_d * reward_depth(shape.depth, cfg) +
                       cfg.lambda_n * reward_size(shape.size, cfg) -
                       cfg.eta * penalty(p, s, tree);
  return {true, value};
}

namespace {

struct ScoredPath {
  CandidatePath path;
  double value;
};

bool still_applicable(const CandidatePath& p, const Subtree& s, const PropertyTree& tree) {
  for (NodeIndex u : p.nodes) {
    if (s.contains(u)) return false;
  }
  return penalty(p, s, tree) == 0;
}

}  // namespace

std::optional<Subtree> extract_from_root(const PropertyTree& tree, NodeIndex root,
                                         const BeamConfig& cfg, const PairScorer& scorer,
                                         const RoundObserver& observer) {
  Subtree s(root);
  while (s.depth() < cfg.d_max && static_cast<int>(s.size()) < cfg.n_max) {
    const int cap = max_path_length(cfg.d_max, s.depth(), cfg.n_max, s.size());
    std::vector<ScoredPath> scored;
    for (auto& p : candidate_paths(tree, s, cap)) {
      const auto v = path_value(p, s, tree, cfg, scorer);
      if (v.feasible) scored.push_back({std::move(p), v.value});
    }
    // Candidates arrive in id-sequence order, so a stable sort on value alone
    // breaks ties by id sequence.
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredPath& a, const ScoredPath& b) { return a.value > b.value; });
    if (scored.size() > static_cast<std::size_t>(cfg.top_k)) scored.resize(cfg.top_k);
    if (scored.empty()) break;

    int applied = 0;
    for (const auto& sp : scored) {
      if (!still_applicable(sp.path, s, tree)) continue;
      const auto shape = augmented_shape(sp.path, s, tree);
      if (!feasible(shape.depth, shape.size, cfg)) continue;
      s = augment(tree, s, sp.path);
      ++applied;
    }
    if (observer) observer(root, s);
    if (applied == 0) break;
  }
  if (s.depth() >= cfg.d_min && static_cast<int>(s.size()) >= cfg.n_min) return s;
  return std::nullopt;
}

std::vector<Subtree> extract_subtrees(const PropertyTree& tree, const BeamConfig& cfg,
                                      const PairScorer& scorer, const RoundObserver& observer) {
  cfg.validate();
  std::vector<std::optional<Subtree>> per_root(tree.size());
  const auto workers = static_cast<std::size_t>(cfg.workers);
  if (workers <= 1 || tree.size() < 2) {
    for (NodeIndex r = 0; r < tree.size(); ++r) {
      per_root[r] = extract_from_root(tree, r, cfg, scorer, observer);
    }
  } else {
    std::atomic<NodeIndex> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min<std::size_t>(workers, tree.size()); ++w) {
      pool.emplace_back([&, w] {
        try {
          for (NodeIndex r = next++; r < tree.size(); r = next++) {
            per_root[r] = extract_from_root(tree, r, cfg, scorer, observer);
          }
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
  std::vector<Subtree> out;
  for (auto& s : per_root) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

std::set<Subtree> enumerate_connected_subtrees(const PropertyTree& tree, int max_depth,
                                               int max_size) {
  if (tree.size() > kBruteForceNodeLimit) {
    throw RefusalError("brute-force enumeration refused: tree has " + std::to_string(tree.size()) +
                       " nodes, limit is " + std::to_string(kBruteForceNodeLimit));
  }
  std::set<Subtree> out;
  // Each connected set is produced once: a node in `ext` is either taken now or
  // excluded for the rest of this branch.
  std::function<void(const Subtree&, std::vector<NodeIndex>)> grow =
      [&](const Subtree& s, std::vector<NodeIndex> ext) {
        out.insert(s);
        if (static_cast<int>(s.size()) >= max_size) return;
        for (std::size_t i = 0; i < ext.size(); ++i) {
          const NodeIndex v = ext[i];
          const NodeIndex parent = *tree.node(v).parent;
          if (s.level_of(parent) + 1 > max_depth) continue;
          Subtree next = s;
          next.add_edge(parent, v);
          std::vector<NodeIndex> rest(ext.begin() + static_cast<std::ptrdiff_t>(i) + 1, ext.end());
          for (NodeIndex c : tree.node(v).children) rest.push_back(c);
          grow(next, std::move(rest));
        }
      };
  for (NodeIndex r = 0; r < tree.size(); ++r) {
    if (max_depth < 1 || max_size < 1) break;
    grow(Subtree(r), tree.node(r).children);
  }
  return out;
}

std::set<Subtree> brute_force_feasible_set(const PropertyTree& tree, const BeamConfig& cfg) {
  std::set<Subtree> out;
  for (auto& s : enumerate_connected_subtrees(tree, cfg.d_max, cfg.n_max)) {
    if (s.depth() >= cfg.d_min && static_cast<int>(s.size()) >= cfg.n_min) out.insert(s);
  }
  return out;
}

}  // namespace nestbench
