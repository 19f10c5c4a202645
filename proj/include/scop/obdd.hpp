#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scop/variables.hpp"

namespace scop {

using NodeId = std::uint32_t;

inline constexpr NodeId kFalseNode = 0;
inline constexpr NodeId kTrueNode = 1;

/// Internal node: `lo` is the dashed (false) child, `hi` the solid (true) child.
/// Terminal slots carry a sentinel var equal to the table size.
struct Node {
  VarId var;
  NodeId lo = kFalseNode;
  NodeId hi = kFalseNode;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Conjunction of positive literals.
struct Cube {
  std::vector<VarId> vars;
};

enum class BoolOp { And, Or };

class Obdd;

/// Hash-consed node store with a memoized apply. Nodes are append-only and ids
/// are never recycled while the builder lives.
class ObddBuilder {
 public:
  explicit ObddBuilder(std::shared_ptr<const VariableTable> vars);

  NodeId mk_node(VarId var, NodeId lo, NodeId hi);
  NodeId apply(BoolOp op, NodeId a, NodeId b);
  NodeId cube(const Cube& c);

  /// OR-fold of the cubes, in list order.
  NodeId disjunction(std::span<const Cube> cubes);

  /// Copy the sub-diagram rooted at `root` into a standalone, canonically
  /// numbered Obdd.
  Obdd extract(NodeId root) const;

  const VariableTable& vars() const { return *vars_; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const;

 private:
  struct Key {
    std::uint32_t a, b, c;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  std::uint32_t level(NodeId id) const;
  void check_id(NodeId id) const;

  std::shared_ptr<const VariableTable> vars_;
  std::vector<Node> nodes_;
  std::unordered_map<Key, NodeId, KeyHash> unique_;
  std::unordered_map<Key, NodeId, KeyHash> computed_;
};

/// Immutable reduced ordered BDD.
///
/// Internal nodes are numbered 2..size()-1 in a canonical topological order:
/// ascending variable level, ties broken by lo-first depth-first discovery
/// from the root. Two diagrams compare equal iff they are isomorphic over
/// equal variable tables.
class Obdd {
 public:
  /// Validates ordering, reduction and uniqueness, drops nothing: every
  /// supplied internal node must be reachable from `root`. `nodes[0]` and
  /// `nodes[1]` are the terminal slots and their contents are ignored.
  /// Throws StructuralError.
  static Obdd from_nodes(std::shared_ptr<const VariableTable> vars, std::vector<Node> nodes, NodeId root);

  /// Constant diagram over `vars`.
  static Obdd constant(std::shared_ptr<const VariableTable> vars, bool value);

  const VariableTable& vars() const { return *vars_; }
  const std::shared_ptr<const VariableTable>& vars_ptr() const { return vars_; }

  NodeId root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t internal_count() const { return nodes_.size() - 2; }
  static bool is_terminal(NodeId id) { return id < 2; }

  const Node& node(NodeId id) const { return nodes_[id]; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Variable index of the node's label; terminals sit at vars().size().
  std::uint32_t level(NodeId id) const { return levels_[id]; }

  /// First internal id whose level is >= `level` (size() if none).
  NodeId first_at_or_below(std::uint32_t level) const;

  /// Every node precedes its children; terminals last (0 then 1).
  std::vector<NodeId> topo_order() const;

  /// Internal nodes labelled with `var`, ascending id.
  std::span<const NodeId> nodes_of(VarId var) const;

  /// Internal parents of `id`, ascending id.
  std::span<const NodeId> parents(NodeId id) const;

  /// Boolean evaluation; `assignment` is indexed by variable index.
  bool eval(const std::vector<bool>& assignment) const;

  friend bool operator==(const Obdd& a, const Obdd& b);

 private:
  Obdd() = default;
  void index();

  std::shared_ptr<const VariableTable> vars_;
  std::vector<Node> nodes_;
  NodeId root_ = kFalseNode;

  std::vector<std::uint32_t> levels_;
  std::vector<std::uint32_t> by_var_offsets_;
  std::vector<NodeId> by_var_;
  std::vector<std::uint32_t> parent_offsets_;
  std::vector<NodeId> parents_;
};

/// Boolean combination of two finished diagrams. Both must be defined over
/// equal variable tables, otherwise StructuralError.
Obdd apply(BoolOp op, const Obdd& a, const Obdd& b);

/// Diagram whose models are exactly the union of the cubes' models. An empty
/// list gives constant false, an empty cube constant true.
/// Throws std::invalid_argument for unknown or repeated variables in a cube.
Obdd from_dnf(std::shared_ptr<const VariableTable> vars, std::span<const Cube> cubes);

/// Line-oriented exchange format:
///   var <name> decision | var <name> stochastic <p>
///   order <name>...            (optional)
///   node <id> <var> <lo> <hi>  (ids >= 2; children defined before use)
///   root <id>
/// Throws ParseError naming the offending line.
Obdd load_obdd(std::string_view text);
std::string dump_obdd(const Obdd& obdd);

/// Graphviz rendering: dashed lo edges, solid hi edges, stochastic nodes as
/// circles and decision nodes as boxes.
std::string to_dot(const Obdd& obdd, std::string_view graph_name = "obdd");

/// Shortest round-trip decimal form, used by every text writer in the library.
std::string format_real(double x);

}  // namespace scop
