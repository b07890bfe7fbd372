#pragma once

#include <functional>
#include <optional>
#include <set>
#include <vector>

#include <json.hpp>

#include "nestbench/association.hpp"
#include "nestbench/tree.hpp"

namespace nestbench {

struct BeamConfig {
  int d_min = 3;
  int d_max = 7;
  int n_min = 10;
  int n_max = 25;
  int top_k = 3;
  double gamma = 0.9;
  double alpha_delta = 1.0;
  double lambda_d = 0.5;
  double lambda_n = 0.5;
  double eta = 1.0;
  double epsilon = 1e-9;
  int workers = 1;  // roots explored concurrently

  void validate() const;
  static BeamConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Value of a candidate path. Infeasible augmentations carry an explicit flag
// instead of a numeric -infinity.
struct PathValue {
  bool feasible = true;
  double value = 0.0;

  static PathValue rejected() { return {false, 0.0}; }
};

// Highest association between u and any member. StructuralError when `members` is empty.
double corr(NodeIndex u, const std::set<NodeIndex>& members, const PairScorer& scorer);
double corr(NodeIndex u, const Subtree& s, const PairScorer& scorer);

double marginal(NodeIndex u, const Subtree& s, const BeamConfig& cfg, const PairScorer& scorer);

// Soft window reward: 1 inside [lo, hi], linear decay outside.
double window_reward(int x, int lo, int hi, double epsilon);
double reward_depth(int d_new, const BeamConfig& cfg);
double reward_size(int n_new, const BeamConfig& cfg);

// Counts structural violations: a start node outside the frontier, plus every
// consecutive pair that is not a tree edge.
int penalty(const CandidatePath& p, const Subtree& s, const PropertyTree& tree);

bool feasible(int d_new, int n_new, const BeamConfig& cfg);

// Depth and size of S + p without materializing it.
struct AugmentShape {
  int depth = 0;
  int size = 0;
};
AugmentShape augmented_shape(const CandidatePath& p, const Subtree& s, const PropertyTree& tree);

PathValue path_value(const CandidatePath& p, const Subtree& s, const PropertyTree& tree,
                     const BeamConfig& cfg, const PairScorer& scorer);

// Called after every expansion round with the root and the current subtree.
using RoundObserver = std::function<void(NodeIndex root, const Subtree& s)>;

// Grows one subtree from `root`; returns it only if it meets both lower bounds.
std::optional<Subtree> extract_from_root(const PropertyTree& tree, NodeIndex root,
                                         const BeamConfig& cfg, const PairScorer& scorer,
                                         const RoundObserver& observer = {});

// One subtree per root that reaches both windows, in root order.
std::vector<Subtree> extract_subtrees(const PropertyTree& tree, const BeamConfig& cfg,
                                      const PairScorer& scorer,
                                      const RoundObserver& observer = {});

inline constexpr std::size_t kBruteForceNodeLimit = 20;

// Every connected root-anchored subtree (any root) of trees up to
// kBruteForceNodeLimit nodes, filtered by both windows. RefusalError above the limit.
std::set<Subtree> brute_force_feasible_set(const PropertyTree& tree, const BeamConfig& cfg);

// Unfiltered enumeration, pruned only by the given upper bounds.
std::set<Subtree> enumerate_connected_subtrees(const PropertyTree& tree, int max_depth,
                                               int max_size);

}  // namespace nestbench
