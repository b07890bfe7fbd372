#include "nestbench/tree.hpp"

#include <algorithm>
#include <functional>

#include "nestbench/error.hpp"

namespace nestbench {

namespace {

constexpr std::pair<Kind, std::string_view> kKindNames[] = {
    {Kind::String, "string"}, {Kind::Number, "number"}, {Kind::Boolean, "boolean"},
    {Kind::Enum, "enum"},     {Kind::Array, "array"},   {Kind::Object, "object"},
    {Kind::Unspecified, "unspecified"},
};

ValueKind value_kind_from_json(const nlohmann::json& j, const std::string& where) {
  ValueKind vk;
  if (!j.contains("kind")) {
    vk.kind = Kind::Unspecified;
    return vk;
  }
  if (!j["kind"].is_string()) throw StructuralError("node " + where + ": kind must be a string");
  vk.kind = parse_kind(j["kind"].get<std::string>());
  if (vk.kind == Kind::Array) {
    if (!j.contains("item_kind") || !j["item_kind"].is_string()) {
      throw StructuralError("node " + where + ": array without item_kind");
    }
    vk.item_kind = parse_kind(j["item_kind"].get<std::string>());
    if (vk.item_kind == Kind::Array || vk.item_kind == Kind::Unspecified) {
      throw StructuralError("node " + where + ": unsupported array item kind");
    }
  }
  if (vk.is_enum_like()) {
    if (!j.contains("variants") || !j["variants"].is_array()) {
      throw StructuralError("node " + where + ": enum without variants");
    }
    vk.variants = j["variants"].get<std::vector<std::string>>();
  }
  return vk;
}

void value_kind_to_json(const ValueKind& vk, nlohmann::json& out) {
  if (vk.kind == Kind::Unspecified) return;
  out["kind"] = std::string(kind_name(vk.kind));
  if (vk.kind == Kind::Array) out["item_kind"] = std::string(kind_name(vk.item_kind));
  if (vk.is_enum_like()) out["variants"] = vk.variants;
}

}  // namespace

std::string_view kind_name(Kind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

Kind parse_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  throw StructuralError("unknown value kind '" + std::string(s) + "'");
}

PropertyTree::PropertyTree(std::string domain, const std::string& root_id,
                           std::vector<NodeSpec> specs)
    : domain_(std::move(domain)) {
  if (specs.empty()) throw StructuralError("tree has no nodes");
  nodes_.reserve(specs.size());
  for (auto& spec : specs) {
    if (spec.id.empty()) throw StructuralError("node with empty id");
    auto [it, fresh] = by_id_.emplace(spec.id, static_cast<NodeIndex>(nodes_.size()));
    if (!fresh) throw StructuralError("duplicate node id '" + spec.id + "'");
    PropertyNode n;
    n.id = spec.id;
    n.name = std::move(spec.name);
    n.description = std::move(spec.description);
    n.value_kind = std::move(spec.value_kind);
    nodes_.push_back(std::move(n));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& n = nodes_[i];
    std::set<std::string> sibling_names;
    for (const auto& cid : specs[i].children) {
      auto it = by_id_.find(cid);
      if (it == by_id_.end()) {
        throw StructuralError("node '" + n.id + "' lists unknown child '" + cid + "'");
      }
      auto& child = nodes_[it->second];
      if (child.parent) {
        throw StructuralError("node '" + cid + "' has more than one parent");
      }
      child.parent = static_cast<NodeIndex>(i);
      n.children.push_back(it->second);
      if (!sibling_names.insert(child.name).second) {
        throw StructuralError("duplicate sibling name '" + child.name + "' under '" + n.id + "'");
      }
    }
  }
  root_ = index_of(root_id);
  if (nodes_[root_].parent) throw StructuralError("root '" + root_id + "' has a parent");

  // Levels by BFS from the root; anything unvisited is disconnected.
  std::vector<NodeIndex> queue{root_};
  std::vector<bool> seen(nodes_.size(), false);
  seen[root_] = true;
  nodes_[root_].level = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto& n = nodes_[queue[head]];
    for (NodeIndex c : n.children) {
      if (seen[c]) throw StructuralError("cycle through node '" + nodes_[c].id + "'");
      seen[c] = true;
      nodes_[c].level = n.level + 1;
      height_ = std::max(height_, nodes_[c].level);
      queue.push_back(c);
    }
  }
  if (queue.size() != nodes_.size()) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!seen[i]) throw StructuralError("node '" + nodes_[i].id + "' is not reachable from root");
    }
  }

  for (const auto& n : nodes_) {
    if (n.name.empty()) throw StructuralError("node '" + n.id + "' has an empty name");
    if (n.name.find('.') != std::string::npos) {
      throw StructuralError("node '" + n.id + "' name contains '.'");
    }
    const auto& vk = n.value_kind;
    if (vk.kind == Kind::Unspecified) continue;
    if (n.children.empty() && vk.has_object_shape()) {
      throw StructuralError("object-shaped node '" + n.id + "' has no children");
    }
    if (!n.children.empty() && !vk.has_object_shape()) {
      throw StructuralError("node '" + n.id + "' of kind " + std::string(kind_name(vk.kind)) +
                            " cannot have children");
    }
    if (vk.is_enum_like()) {
      std::set<std::string> distinct(vk.variants.begin(), vk.variants.end());
      if (distinct.size() < 2 || distinct.size() != vk.variants.size()) {
        throw StructuralError("enum node '" + n.id + "' needs at least two distinct variants");
      }
    }
  }
}

PropertyTree PropertyTree::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw StructuralError("tree document must be an object");
  for (const char* field : {"domain", "root_id", "nodes"}) {
    if (!doc.contains(field)) throw StructuralError(std::string("tree document missing '") + field + "'");
  }
  std::vector<NodeSpec> specs;
  for (const auto& jn : doc["nodes"]) {
    NodeSpec spec;
    spec.id = jn.at("id").get<std::string>();
    spec.name = jn.value("name", std::string{});
    spec.description = jn.value("description", std::string{});
    spec.value_kind = value_kind_from_json(jn, spec.id);
    if (jn.contains("children")) spec.children = jn["children"].get<std::vector<std::string>>();
    specs.push_back(std::move(spec));
  }
  return PropertyTree(doc["domain"].get<std::string>(), doc["root_id"].get<std::string>(),
                      std::move(specs));
}

nlohmann::json PropertyTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nlohmann::json jn;
    jn["id"] = n.id;
    jn["name"] = n.name;
    jn["description"] = n.description;
    value_kind_to_json(n.value_kind, jn);
    nlohmann::json kids = nlohmann::json::array();
    for (NodeIndex c : n.children) kids.push_back(nodes_[c].id);
    jn["children"] = std::move(kids);
    nodes.push_back(std::move(jn));
  }
  return {{"domain", domain_}, {"root_id", nodes_[root_].id}, {"nodes", std::move(nodes)}};
}

PropertyTree PropertyTree::from_nested_json(const nlohmann::json& doc) {
  if (!doc.contains("root")) throw StructuralError("nested tree document missing 'root'");
  std::vector<NodeSpec> specs;
  std::function<std::string(const nlohmann::json&, const std::string&)> walk =
      [&](const nlohmann::json& jn, const std::string& prefix) -> std::string {
    NodeSpec spec;
    spec.name = jn.value("name", std::string{});
    spec.id = jn.contains("id") ? jn["id"].get<std::string>()
                                : (prefix.empty() ? spec.name : prefix + "." + spec.name);
    spec.description = jn.value("description", std::string{});
    spec.value_kind = value_kind_from_json(jn, spec.id);
    std::size_t slot = specs.size();
    specs.push_back(spec);
    std::vector<std::string> kids;
    if (jn.contains("children")) {
      for (const auto& c : jn["children"]) kids.push_back(walk(c, specs[slot].id));
    }
    specs[slot].children = std::move(kids);
    return specs[slot].id;
  };
  std::string root_id = walk(doc["root"], "");
  return PropertyTree(doc.value("domain", std::string{}), root_id, std::move(specs));
}

bool PropertyTree::has_id(std::string_view id) const {
  return by_id_.find(std::string(id)) != by_id_.end();
}

NodeIndex PropertyTree::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) throw StructuralError("unknown node id '" + std::string(id) + "'");
  return it->second;
}

bool PropertyTree::has_edge(NodeIndex parent, NodeIndex child) const {
  if (child >= nodes_.size() || parent >= nodes_.size()) return false;
  return nodes_[child].parent == parent;
}

Subtree::Subtree(NodeIndex root) : root_(root) {
  members_.insert(root);
  level_[root] = 1;
}

int Subtree::level_of(NodeIndex member) const {
  auto it = level_.find(member);
  if (it == level_.end()) throw StructuralError("node is not a subtree member");
  return it->second;
}

void Subtree::add_edge(NodeIndex parent, NodeIndex child) {
  if (!contains(parent)) throw StructuralError("edge parent is not a member");
  if (contains(child)) throw StructuralError("edge child is already a member");
  members_.insert(child);
  edges_.emplace(parent, child);
  int lvl = level_[parent] + 1;
  level_[child] = lvl;
  depth_ = std::max(depth_, lvl);
}

void Subtree::validate(const PropertyTree& tree) const {
  if (root_ >= tree.size()) throw StructuralError("subtree root is not a tree node");
  for (const auto& [p, c] : edges_) {
    if (!tree.has_edge(p, c)) {
      throw StructuralError("subtree edge " + tree.id_of(p) + "->" + tree.id_of(c) +
                            " is not a tree edge");
    }
  }
}

std::vector<std::string> Subtree::member_ids(const PropertyTree& tree) const {
  std::vector<std::string> ids;
  ids.reserve(members_.size());
  for (NodeIndex m : members_) ids.push_back(tree.id_of(m));
  return ids;
}

nlohmann::json Subtree::to_json(const PropertyTree& tree) const {
  return {{"root_id", tree.id_of(root_)},
          {"member_ids", member_ids(tree)},
          {"depth", depth_},
          {"size", members_.size()}};
}

Subtree Subtree::from_json(const PropertyTree& tree, const nlohmann::json& doc) {
  NodeIndex root = tree.index_of(doc.at("root_id").get<std::string>());
  std::set<NodeIndex> wanted;
  for (const auto& id : doc.at("member_ids")) wanted.insert(tree.index_of(id.get<std::string>()));
  if (!wanted.count(root)) throw StructuralError("subtree members do not include the root");
  Subtree s(root);
  std::vector<NodeIndex> stack{root};
  while (!stack.empty()) {
    NodeIndex u = stack.back();
    stack.pop_back();
    for (NodeIndex c : tree.node(u).children) {
      if (wanted.count(c)) {
        s.add_edge(u, c);
        stack.push_back(c);
      }
    }
  }
  if (s.size() != wanted.size()) {
    throw StructuralError("subtree members are not connected to root '" + tree.id_of(root) + "'");
  }
  return s;
}

bool id_sequence_less(const PropertyTree& tree, const std::vector<NodeIndex>& a,
                      const std::vector<NodeIndex>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [&](NodeIndex x, NodeIndex y) {
                                        return tree.id_of(x) < tree.id_of(y);
                                      });
}

std::set<NodeIndex> frontier(const PropertyTree& tree, const Subtree& s) {
  if (s.root() >= tree.size()) throw StructuralError("subtree root is not a tree node");
  std::set<NodeIndex> out;
  for (NodeIndex m : s.members()) {
    for (NodeIndex c : tree.node(m).children) {
      if (!s.contains(c)) out.insert(c);
    }
  }
  return out;
}

std::vector<CandidatePath> candidate_paths(const PropertyTree& tree, const Subtree& s,
                                           int max_len) {
  if (max_len <= 0) throw ArgumentError("candidate path length cap must be positive");
  std::vector<CandidatePath> out;
  std::vector<NodeIndex> current;
  std::function<void(NodeIndex)> grow = [&](NodeIndex u) {
    current.push_back(u);
    out.push_back(CandidatePath{current});
    if (static_cast<int>(current.size()) < max_len) {
      for (NodeIndex c : tree.node(u).children) {
        if (!s.contains(c)) grow(c);
      }
    }
    current.pop_back();
  };
  for (NodeIndex f : frontier(tree, s)) grow(f);
  std::sort(out.begin(), out.end(), [&](const CandidatePath& a, const CandidatePath& b) {
    return id_sequence_less(tree, a.nodes, b.nodes);
  });
  return out;
}

int max_path_length(int d_max, int depth, int n_max, std::size_t size) {
  return std::min(d_max - depth, n_max - static_cast<int>(size));
}

int tree_distance(const PropertyTree& tree, NodeIndex u, NodeIndex v) {
  if (u >= tree.size() || v >= tree.size()) throw StructuralError("node index out of range");
  int dist = 0;
  while (tree.node(u).level > tree.node(v).level) {
    u = *tree.node(u).parent;
    ++dist;
  }
  while (tree.node(v).level > tree.node(u).level) {
    v = *tree.node(v).parent;
    ++dist;
  }
  while (u != v) {
    u = *tree.node(u).parent;
    v = *tree.node(v).parent;
    dist += 2;
  }
  return dist;
}

int tree_distance(const PropertyTree& tree, std::string_view u, std::string_view v) {
  return tree_distance(tree, tree.index_of(u), tree.index_of(v));
}

Subtree augment(const PropertyTree& tree, const Subtree& s, const CandidatePath& p) {
  if (p.nodes.empty()) return s;
  Subtree out = s;
  const auto& head = tree.node(p.nodes.front());
  if (!head.parent || !s.contains(*head.parent) || s.contains(p.nodes.front())) {
    throw StructuralError("path does not start at the frontier");
  }
  NodeIndex prev = *head.parent;
  for (NodeIndex u : p.nodes) {
    if (!tree.has_edge(prev, u)) throw StructuralError("path step is not a tree edge");
    out.add_edge(prev, u);
    prev = u;
  }
  return out;
}

}  // namespace nestbench
