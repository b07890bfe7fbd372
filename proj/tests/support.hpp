#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestbench/tree.hpp"

namespace testsupport {

using nlohmann::json;
using nestbench::PropertyTree;
using NodeSpec = PropertyTree::NodeSpec;

inline NodeSpec obj(std::string id, std::string name, std::string desc, std::vector<std::string> kids) {
  NodeSpec s{std::move(id), std::move(name), std::move(desc), {}, std::move(kids)};
  s.value_kind.kind = nestbench::Kind::Object;
  return s;
}

inline NodeSpec leaf(std::string id, std::string name, std::string desc,
                     nestbench::Kind k = nestbench::Kind::String) {
  NodeSpec s{std::move(id), std::move(name), std::move(desc), {}, {}};
  s.value_kind.kind = k;
  return s;
}

// a -> b -> c ... with ids and names equal to the letters.
inline PropertyTree chain(int n) {
  std::vector<NodeSpec> specs;
  for (int i = 0; i < n; ++i) {
    std::string id(1, static_cast<char>('a' + i));
    if (i + 1 < n) {
      specs.push_back(obj(id, id, "node " + id, {std::string(1, static_cast<char>('a' + i + 1))}));
    } else {
      specs.push_back(leaf(id, id, "node " + id));
    }
  }
  return PropertyTree("chain", "a", std::move(specs));
}

inline PropertyTree star() {
  return PropertyTree("star", "r",
                      {obj("r", "r", "root", {"x", "y", "z"}), leaf("x", "x", "first"),
                       leaf("y", "y", "second"), leaf("z", "z", "third")});
}

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "engine", "power", "torque", "weight", "sensor", "type", "rating", "score", "source",
      "name",   "price", "amount", "date",   "city",   "owner", "model", "year", "memory"};
  return words;
}

// Random tree of `n` nodes: each node i > 0 hangs under a uniformly chosen
// earlier node. Ids are zero-padded so id order equals creation order.
inline PropertyTree random_tree(std::mt19937_64& rng, int n) {
  std::vector<int> parent(n, -1);
  std::vector<std::vector<int>> kids(n);
  for (int i = 1; i < n; ++i) {
    parent[i] = std::uniform_int_distribution<int>(0, i - 1)(rng);
    kids[parent[i]].push_back(i);
  }
  auto id = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "n%02d", i);
    return std::string(buf);
  };
  const auto& vocab = vocabulary();
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  std::vector<NodeSpec> specs;
  for (int i = 0; i < n; ++i) {
    NodeSpec s;
    s.id = id(i);
    s.name = vocab[word(rng)] + std::to_string(i);
    s.description = vocab[word(rng)] + " " + vocab[word(rng)] + " " + vocab[word(rng)];
    for (int k : kids[i]) s.children.push_back(id(k));
    if (!kids[i].empty()) {
      if (i != 0 && rng() % 4 == 0) {
        s.value_kind.kind = nestbench::Kind::Array;
        s.value_kind.item_kind = nestbench::Kind::Object;
      } else {
        s.value_kind.kind = nestbench::Kind::Object;
      }
    } else {
      switch (rng() % 5) {
        case 0: s.value_kind.kind = nestbench::Kind::Number; break;
        case 1: s.value_kind.kind = nestbench::Kind::Boolean; break;
        case 2:
          s.value_kind.kind = nestbench::Kind::Enum;
          s.value_kind.variants = {"alpha", "beta", "gamma"};
          break;
        case 3:
          s.value_kind.kind = nestbench::Kind::Array;
          s.value_kind.item_kind = nestbench::Kind::String;
          break;
        default: s.value_kind.kind = nestbench::Kind::String;
      }
    }
    specs.push_back(std::move(s));
  }
  return PropertyTree("random", id(0), std::move(specs));
}

// Breadth-first distances over the undirected tree, built from ids only.
inline std::vector<std::vector<int>> bfs_distances(const PropertyTree& t) {
  const auto n = t.size();
  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto c : t.node(static_cast<nestbench::NodeIndex>(i)).children) {
      adj[i].push_back(static_cast<int>(c));
      adj[c].push_back(static_cast<int>(i));
    }
  }
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(static_cast<int>(s));
    dist[s][s] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (dist[s][v] < 0) {
          dist[s][v] = dist[s][u] + 1;
          q.push(v);
        }
      }
    }
  }
  return dist;
}

// Longest member chain from the root, in levels, by BFS over member edges.
inline int bfs_depth(const nestbench::Subtree& s) {
  std::map<nestbench::NodeIndex, std::vector<nestbench::NodeIndex>> down;
  for (const auto& [p, c] : s.edges()) down[p].push_back(c);
  std::queue<std::pair<nestbench::NodeIndex, int>> q;
  q.push({s.root(), 1});
  int best = 0;
  while (!q.empty()) {
    auto [u, d] = q.front();
    q.pop();
    best = std::max(best, d);
    for (auto c : down[u]) q.push({c, d + 1});
  }
  return best;
}

// Naive flattener: "segment/segment/...=value" strings, numbers by double value.
inline void naive_flatten(const json& v, const std::string& prefix, std::set<std::string>& out) {
  switch (v.type()) {
    case json::value_t::object:
      for (auto it = v.begin(); it != v.end(); ++it) naive_flatten(it.value(), prefix + "/k:" + it.key(), out);
      return;
    case json::value_t::array:
      for (std::size_t i = 0; i < v.size(); ++i) naive_flatten(v[i], prefix + "/i:" + std::to_string(i), out);
      return;
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
    case json::value_t::number_float: {
      char buf[40];
      double d = v.get<double>();
      if (d == 0) d = 0;  // fold -0
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out.insert(prefix + "=n:" + buf);
      return;
    }
    case json::value_t::string:
      out.insert(prefix + "=s:" + v.get<std::string>());
      return;
    case json::value_t::boolean:
      out.insert(prefix + (v.get<bool>() ? "=b:1" : "=b:0"));
      return;
    default:
      out.insert(prefix + "=null");
  }
}

inline double naive_key_score(const json& a, const json& b) {
  std::set<std::string> fa, fb;
  naive_flatten(a, "", fa);
  naive_flatten(b, "", fb);
  if (fa.empty() && fb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : fa) inter += fb.count(x);
  return static_cast<double>(inter) / static_cast<double>(fa.size() + fb.size() - inter);
}

inline json random_scalar(std::mt19937_64& rng) {
  static const char* strs[] = {"x", "y", "HarmonyOS 3.0", "92%", "", "Sleep Tracker"};
  switch (rng() % 6) {
    case 0: return static_cast<int>(rng() % 5);
    case 1: return static_cast<double>(rng() % 40) / 4.0;
    case 2: return strs[rng() % 6];
    case 3: return rng() % 2 == 0;
    case 4: return nullptr;
    default: return static_cast<double>(rng() % 3);  // integral double, equals an int
  }
}

inline json random_json(std::mt19937_64& rng, int depth) {
  static const char* keys[] = {"a", "b", "c", "Memory", "Sensors"};
  const auto pick = rng() % 10;
  if (depth <= 0 || pick < 3) return random_scalar(rng);
  if (pick < 7) {
    json o = json::object();
    const auto n = rng() % 4;
    for (std::size_t i = 0; i < n; ++i) o[keys[rng() % 5]] = random_json(rng, depth - 1);
    return o;
  }
  json a = json::array();
  const auto n = rng() % 4;
  for (std::size_t i = 0; i < n; ++i) a.push_back(random_json(rng, depth - 1));
  return a;
}

// Mutates a copy of `v` at one random leaf, sometimes leaving it unchanged.
inline json perturb(std::mt19937_64& rng, json v) {
  if (v.is_object() && !v.empty()) {
    auto it = v.begin();
    std::advance(it, static_cast<long>(rng() % v.size()));
    if (rng() % 5 == 0) {
      v.erase(it.key());
    } else {
      *it = perturb(rng, *it);
    }
    return v;
  }
  if (v.is_array() && !v.empty()) {
    auto& e = v[rng() % v.size()];
    e = perturb(rng, e);
    return v;
  }
  if (rng() % 3 == 0) return v;
  return random_scalar(rng);
}

}  // namespace testsupport
