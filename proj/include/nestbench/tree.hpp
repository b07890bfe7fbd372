#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace nestbench {

using NodeIndex = std::uint32_t;
using Edge = std::pair<NodeIndex, NodeIndex>;

// Unspecified marks a property whose type has not been annotated yet; such trees
// can be explored but not turned into schemas.
enum class Kind { String, Number, Boolean, Enum, Array, Object, Unspecified };

std::string_view kind_name(Kind k);
Kind parse_kind(std::string_view s);

// What a property holds. Arrays carry an item kind; enums (and arrays of enums)
// carry their variants.
struct ValueKind {
  Kind kind = Kind::String;
  Kind item_kind = Kind::String;
  std::vector<std::string> variants;

  bool is_array() const { return kind == Kind::Array; }
  bool is_object() const { return kind == Kind::Object; }
  // True when the node's tree children describe object properties.
  bool has_object_shape() const {
    return kind == Kind::Object || (kind == Kind::Array && item_kind == Kind::Object);
  }
  bool is_enum_like() const {
    return kind == Kind::Enum || (kind == Kind::Array && item_kind == Kind::Enum);
  }

  friend bool operator==(const ValueKind&, const ValueKind&) = default;
};

struct PropertyNode {
  std::string id;
  std::string name;
  std::string description;
  ValueKind value_kind;
  std::vector<NodeIndex> children;
  std::optional<NodeIndex> parent;
  int level = 1;  // root = 1
};

// Rooted tree of domain properties. Immutable after construction; every accessor
// is safe for concurrent readers.
class PropertyTree {
 public:
  struct NodeSpec {
    std::string id;
    std::string name;
    std::string description;
    ValueKind value_kind;
    std::vector<std::string> children;
  };

  // Validates every structural invariant and throws StructuralError on the first
  // violation.
  PropertyTree(std::string domain, const std::string& root_id, std::vector<NodeSpec> nodes);

  static PropertyTree from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  // Accepts the nested authoring form ({domain, root: {id?, name, description,
  // kind, ..., children: [...]}}) and assigns ids by dotted name path when absent.
  static PropertyTree from_nested_json(const nlohmann::json& doc);

  const std::string& domain() const { return domain_; }
  NodeIndex root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  const PropertyNode& node(NodeIndex i) const { return nodes_.at(i); }
  const std::vector<PropertyNode>& nodes() const { return nodes_; }

  bool has_id(std::string_view id) const;
  NodeIndex index_of(std::string_view id) const;  // StructuralError if unknown
  const std::string& id_of(NodeIndex i) const { return nodes_.at(i).id; }

  bool has_edge(NodeIndex parent, NodeIndex child) const;
  int height() const { return height_; }  // deepest level, root = 1

 private:
  std::string domain_;
  NodeIndex root_ = 0;
  std::vector<PropertyNode> nodes_;
  std::unordered_map<std::string, NodeIndex> by_id_;
  int height_ = 1;
};

// Connected, root-anchored set of tree nodes. Edges are added one at a time, each
// attaching a new member below an existing one, so connectivity holds by
// construction.
class Subtree {
 public:
  explicit Subtree(NodeIndex root);

  NodeIndex root() const { return root_; }
  const std::set<NodeIndex>& members() const { return members_; }
  const std::set<Edge>& edges() const { return edges_; }
  bool contains(NodeIndex i) const { return members_.count(i) != 0; }
  std::size_t size() const { return members_.size(); }

  // Depth in levels: a single node has depth 1.
  int depth() const { return depth_; }
  int level_of(NodeIndex member) const;  // root = 1

  void add_edge(NodeIndex parent, NodeIndex child);

  // Throws StructuralError unless every edge exists in `tree` and the root is a
  // tree node.
  void validate(const PropertyTree& tree) const;

  std::vector<std::string> member_ids(const PropertyTree& tree) const;
  nlohmann::json to_json(const PropertyTree& tree) const;
  static Subtree from_json(const PropertyTree& tree, const nlohmann::json& doc);

  friend bool operator==(const Subtree& a, const Subtree& b) {
    return a.root_ == b.root_ && a.members_ == b.members_;
  }
  friend std::strong_ordering operator<=>(const Subtree& a, const Subtree& b) {
    if (auto c = a.root_ <=> b.root_; c != 0) return c;
    return std::lexicographical_compare_three_way(a.members_.begin(), a.members_.end(),
                                                  b.members_.begin(), b.members_.end());
  }

 private:
  NodeIndex root_;
  std::set<NodeIndex> members_;
  std::set<Edge> edges_;
  std::unordered_map<NodeIndex, int> level_;
  int depth_ = 1;
};

// A downward chain of non-members starting at a frontier node.
struct CandidatePath {
  std::vector<NodeIndex> nodes;
  friend bool operator==(const CandidatePath&, const CandidatePath&) = default;
};

// Lexicographic comparison by node-id sequence.
bool id_sequence_less(const PropertyTree& tree, const std::vector<NodeIndex>& a,
                      const std::vector<NodeIndex>& b);

std::set<NodeIndex> frontier(const PropertyTree& tree, const Subtree& s);

// All simple downward paths of 1..max_len nodes that start at a frontier node,
// ordered by node-id sequence.
std::vector<CandidatePath> candidate_paths(const PropertyTree& tree, const Subtree& s,
                                           int max_len);

// Candidate length cap for one expansion round.
int max_path_length(int d_max, int depth, int n_max, std::size_t size);

int tree_distance(const PropertyTree& tree, NodeIndex u, NodeIndex v);
int tree_distance(const PropertyTree& tree, std::string_view u, std::string_view v);

// The subtree S + p. Does not check feasibility.
Subtree augment(const PropertyTree& tree, const Subtree& s, const CandidatePath& p);

}  // namespace nestbench
