#include <gtest/gtest.h>

#include "nestbench/error.hpp"
#include "nestbench/tree.hpp"
#include "support.hpp"

using namespace nestbench;
using namespace testsupport;

namespace {

std::vector<std::string> ids(const PropertyTree& t, const std::set<NodeIndex>& s) {
  std::vector<std::string> out;
  for (auto i : s) out.push_back(t.id_of(i));
  return out;
}

std::vector<std::vector<std::string>> ids(const PropertyTree& t, const std::vector<CandidatePath>& ps) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : ps) {
    out.emplace_back();
    for (auto i : p.nodes) out.back().push_back(t.id_of(i));
  }
  return out;
}

Subtree whole(const PropertyTree& t) {
  Subtree s(t.root());
  std::vector<NodeIndex> stack{t.root()};
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto c : t.node(u).children) {
      s.add_edge(u, c);
      stack.push_back(c);
    }
  }
  return s;
}

}  // namespace

TEST(Frontier, ChainFromHead) {
  auto t = chain(3);
  Subtree s(t.index_of("a"));
  EXPECT_EQ(ids(t, frontier(t, s)), (std::vector<std::string>{"b"}));
}

TEST(Frontier, StarWithOneChild) {
  auto t = star();
  Subtree s(t.index_of("r"));
  s.add_edge(t.index_of("r"), t.index_of("x"));
  EXPECT_EQ(ids(t, frontier(t, s)), (std::vector<std::string>{"y", "z"}));
}

TEST(Frontier, WholeTreeIsEmpty) {
  auto t = star();
  EXPECT_TRUE(frontier(t, whole(t)).empty());
}

TEST(Frontier, ForeignSubtreeIsStructuralError) {
  auto t = star();
  Subtree s(99);
  EXPECT_THROW(frontier(t, s), StructuralError);
}

TEST(CandidatePaths, ChainMaxTwo) {
  auto t = chain(4);
  Subtree s(t.index_of("a"));
  auto got = ids(t, candidate_paths(t, s, 2));
  EXPECT_EQ(got, (std::vector<std::vector<std::string>>{{"b"}, {"b", "c"}}));
}

TEST(CandidatePaths, CoveredTreeHasNone) {
  auto t = chain(3);
  EXPECT_TRUE(candidate_paths(t, whole(t), 3).empty());
}

TEST(CandidatePaths, NonPositiveLengthRejected) {
  auto t = chain(3);
  Subtree s(t.root());
  EXPECT_THROW(candidate_paths(t, s, 0), ArgumentError);
  EXPECT_THROW(candidate_paths(t, s, -1), ArgumentError);
}

TEST(CandidatePaths, LengthCap) {
  EXPECT_EQ(max_path_length(7, 5, 20, 18), 2);
  EXPECT_EQ(max_path_length(7, 7, 20, 3), 0);
}

TEST(CandidatePaths, StarOrderedById) {
  auto t = star();
  Subtree s(t.root());
  auto got = ids(t, candidate_paths(t, s, 3));
  EXPECT_EQ(got, (std::vector<std::vector<std::string>>{{"x"}, {"y"}, {"z"}}));
}

TEST(Depth, Conventions) {
  auto t = chain(4);
  EXPECT_EQ(Subtree(t.root()).depth(), 1);
  EXPECT_EQ(whole(t).depth(), 4);
  EXPECT_EQ(whole(star()).depth(), 2);
}

TEST(Distance, Basics) {
  auto t = star();
  EXPECT_EQ(tree_distance(t, "x", "x"), 0);
  EXPECT_EQ(tree_distance(t, "r", "y"), 1);
  EXPECT_EQ(tree_distance(t, "x", "z"), 2);
  EXPECT_THROW(tree_distance(t, "x", "nope"), StructuralError);
}

TEST(TreeValidation, RejectsBadTrees) {
  EXPECT_THROW(PropertyTree("d", "r", {obj("r", "r", "", {"x", "x"}), leaf("x", "x", "")}), StructuralError);
  EXPECT_THROW(PropertyTree("d", "r", {obj("r", "r", "", {"x", "y"}), leaf("x", "n", ""), leaf("y", "n", "")}),
               StructuralError);
  EXPECT_THROW(PropertyTree("d", "r", {obj("r", "r", "", {"x"}), leaf("x", "a.b", "")}), StructuralError);
  EXPECT_THROW(PropertyTree("d", "r", {obj("r", "r", "", {"x"}), leaf("x", "", "")}), StructuralError);
  EXPECT_THROW(PropertyTree("d", "r", {obj("r", "r", "", {}), leaf("x", "x", "")}), StructuralError);
  EXPECT_THROW(PropertyTree("d", "r", {obj("r", "r", "", {"q"})}), StructuralError);
  auto bad_enum = leaf("x", "x", "", Kind::Enum);
  bad_enum.value_kind.variants = {"a", "a"};
  EXPECT_THROW(PropertyTree("d", "r", {obj("r", "r", "", {"x"}), bad_enum}), StructuralError);
  auto scalar_parent = leaf("r", "r", "");
  scalar_parent.children = {"x"};
  EXPECT_THROW(PropertyTree("d", "r", {scalar_parent, leaf("x", "x", "")}), StructuralError);
}

TEST(TreeJson, FlatRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    auto t = random_tree(rng, 12);
    auto again = PropertyTree::from_json(t.to_json());
    EXPECT_EQ(again.to_json(), t.to_json());
  }
}

TEST(TreeJson, NestedForm) {
  auto doc = json::parse(R"({"domain":"d","root":{"name":"Device","kind":"object","children":[
      {"name":"Memory","kind":"number","description":"RAM"},
      {"name":"Sensors","kind":"array","item_kind":"object","children":[
        {"name":"SensorType","kind":"enum","variants":["a","b"]}]}]}})");
  auto t = PropertyTree::from_nested_json(doc);
  EXPECT_EQ(t.size(), 4u);
  EXPECT_TRUE(t.has_id("Device.Sensors.SensorType"));
  EXPECT_EQ(t.height(), 3);
}

TEST(SubtreeJson, RoundTripAndValidation) {
  auto t = chain(3);
  auto s = whole(t);
  EXPECT_EQ(Subtree::from_json(t, s.to_json(t)), s);
  EXPECT_THROW(Subtree::from_json(t, json::parse(R"({"root_id":"a","member_ids":["a","c"]})")),
               StructuralError);
}

TEST(Augment, RejectsInvalidPath) {
  auto t = chain(3);
  Subtree s(t.root());
  EXPECT_THROW(augment(t, s, CandidatePath{{t.index_of("c")}}), StructuralError);
  auto s2 = augment(t, s, CandidatePath{{t.index_of("b"), t.index_of("c")}});
  EXPECT_EQ(s2.size(), 3u);
  EXPECT_EQ(s2.depth(), 3);
}

TEST(TreeProperties, FrontierDisjointAndPathsValid) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_tree(rng, 2 + static_cast<int>(rng() % 14));
    Subtree s(t.root());
    for (int step = 0; step < 3; ++step) {
      auto f = frontier(t, s);
      for (auto u : f) EXPECT_FALSE(s.contains(u));
      for (const auto& p : candidate_paths(t, s, 3)) {
        ASSERT_FALSE(p.nodes.empty());
        EXPECT_TRUE(f.count(p.nodes.front()));
        std::set<NodeIndex> seen;
        for (std::size_t i = 0; i < p.nodes.size(); ++i) {
          EXPECT_FALSE(s.contains(p.nodes[i]));
          EXPECT_TRUE(seen.insert(p.nodes[i]).second);
          if (i > 0) EXPECT_TRUE(t.has_edge(p.nodes[i - 1], p.nodes[i]));
        }
      }
      auto ps = candidate_paths(t, s, 1);
      if (ps.empty()) break;
      s = augment(t, s, ps[rng() % ps.size()]);
    }
  }
}

TEST(TreeProperties, DepthAndDistanceMatchBfs) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    auto t = random_tree(rng, 1 + static_cast<int>(rng() % 15));
    auto dist = bfs_distances(t);
    for (NodeIndex u = 0; u < t.size(); ++u) {
      for (NodeIndex v = 0; v < t.size(); ++v) EXPECT_EQ(tree_distance(t, u, v), dist[u][v]);
    }
    Subtree s(t.root());
    for (;;) {
      EXPECT_EQ(s.depth(), bfs_depth(s));
      auto ps = candidate_paths(t, s, 1);
      if (ps.empty()) break;
      s = augment(t, s, ps[rng() % ps.size()]);
    }
  }
}
