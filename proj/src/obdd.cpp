#include "scop/obdd.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "scop/errors.hpp"
#include "text_util.hpp"

namespace scop {

namespace {

constexpr std::uint32_t kTerminalLevel = std::numeric_limits<std::uint32_t>::max();

struct TripleHash {
  std::size_t operator()(const Node& n) const noexcept {
    return (static_cast<std::size_t>(n.var.index) * 1000003u) ^ (static_cast<std::size_t>(n.lo) * 998244353u) ^ n.hi;
  }
};

}  // namespace

std::string format_real(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// ObddBuilder

std::size_t ObddBuilder::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = k.a;
  h = h * 0x9e3779b97f4a7c15ULL + k.b;
  h = h * 0x9e3779b97f4a7c15ULL + k.c;
  return static_cast<std::size_t>(h ^ (h >> 29));
}

ObddBuilder::ObddBuilder(std::shared_ptr<const VariableTable> vars) : vars_(std::move(vars)) {
  if (!vars_) throw std::invalid_argument("ObddBuilder: null variable table");
  const VarId sentinel{static_cast<std::uint32_t>(vars_->size())};
  nodes_.push_back(Node{sentinel, kFalseNode, kFalseNode});
  nodes_.push_back(Node{sentinel, kTrueNode, kTrueNode});
}

const Node& ObddBuilder::node(NodeId id) const {
  check_id(id);
  return nodes_[id];
}

void ObddBuilder::check_id(NodeId id) const {
  if (id >= nodes_.size()) throw StructuralError("node id " + std::to_string(id) + " does not belong to this store");
}

std::uint32_t ObddBuilder::level(NodeId id) const {
  return id < 2 ? kTerminalLevel : nodes_[id].var.index;
}

NodeId ObddBuilder::mk_node(VarId var, NodeId lo, NodeId hi) {
  check_id(lo);
  check_id(hi);
  if (var.index >= vars_->size()) throw StructuralError("unknown variable index " + std::to_string(var.index));
  if (lo == hi) return lo;
  if (var.index >= level(lo) || var.index >= level(hi))
    throw StructuralError("ordering violation: variable '" + (*vars_)[var].name + "' must precede its children");

  const Key key{var.index, lo, hi};
  if (auto it = unique_.find(key); it != unique_.end()) return it->second;
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{var, lo, hi});
  unique_.emplace(key, id);
  return id;
}

NodeId ObddBuilder::apply(BoolOp op, NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  if (op == BoolOp::And) {
    if (a == kFalseNode || b == kFalseNode) return kFalseNode;
    if (a == kTrueNode) return b;
    if (b == kTrueNode) return a;
  } else {
    if (a == kTrueNode || b == kTrueNode) return kTrueNode;
    if (a == kFalseNode) return b;
    if (b == kFalseNode) return a;
  }
  if (a == b) return a;
  if (a > b) std::swap(a, b);

  const Key key{static_cast<std::uint32_t>(op), a, b};
  if (auto it = computed_.find(key); it != computed_.end()) return it->second;

  const std::uint32_t la = level(a);
  const std::uint32_t lb = level(b);
  const std::uint32_t top = std::min(la, lb);
  const Node na = nodes_[a];
  const Node nb = nodes_[b];
  const NodeId a0 = la == top ? na.lo : a;
  const NodeId a1 = la == top ? na.hi : a;
  const NodeId b0 = lb == top ? nb.lo : b;
  const NodeId b1 = lb == top ? nb.hi : b;

  const NodeId lo = apply(op, a0, b0);
  const NodeId hi = apply(op, a1, b1);
  const NodeId r = mk_node(VarId{top}, lo, hi);
  computed_.emplace(key, r);
  return r;
}

NodeId ObddBuilder::cube(const Cube& c) {
  std::vector<VarId> sorted = c.vars;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("cube mentions a variable twice");
  NodeId acc = kTrueNode;
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    if (it->index >= vars_->size()) throw std::invalid_argument("cube mentions an unknown variable");
    acc = mk_node(*it, kFalseNode, acc);
  }
  return acc;
}

NodeId ObddBuilder::disjunction(std::span<const Cube> cubes) {
  NodeId acc = kFalseNode;
  for (const auto& c : cubes) acc = apply(BoolOp::Or, acc, cube(c));
  return acc;
}

Obdd ObddBuilder::extract(NodeId root) const {
  check_id(root);
  std::unordered_map<NodeId, NodeId> remap{{kFalseNode, kFalseNode}, {kTrueNode, kTrueNode}};
  std::vector<NodeId> order;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    if (remap.contains(n)) continue;
    remap.emplace(n, static_cast<NodeId>(order.size() + 2));
    order.push_back(n);
    stack.push_back(nodes_[n].hi);
    stack.push_back(nodes_[n].lo);
  }
  std::vector<Node> compact(order.size() + 2, nodes_[0]);
  compact[1] = nodes_[1];
  for (NodeId n : order) {
    const Node& src = nodes_[n];
    compact[remap[n]] = Node{src.var, remap[src.lo], remap[src.hi]};
  }
  return Obdd::from_nodes(vars_, std::move(compact), remap[root]);
}

// ---------------------------------------------------------------------------
// Obdd

Obdd Obdd::constant(std::shared_ptr<const VariableTable> vars, bool value) {
  ObddBuilder b(std::move(vars));
  return b.extract(value ? kTrueNode : kFalseNode);
}

Obdd Obdd::from_nodes(std::shared_ptr<const VariableTable> vars, std::vector<Node> nodes, NodeId root) {
  if (!vars) throw StructuralError("null variable table");
  if (nodes.size() < 2) throw StructuralError("node store lacks terminal slots");
  if (root >= nodes.size()) throw StructuralError("root id out of range");
  const auto nvars = static_cast<std::uint32_t>(vars->size());
  auto lvl = [&](NodeId id) { return id < 2 ? kTerminalLevel : nodes[id].var.index; };

  for (NodeId i = 2; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (n.var.index >= nvars) throw StructuralError("node " + std::to_string(i) + " has an unknown variable");
    if (n.lo >= nodes.size() || n.hi >= nodes.size())
      throw StructuralError("node " + std::to_string(i) + " has a dangling child");
    if (n.lo == n.hi) throw StructuralError("node " + std::to_string(i) + " is redundant (lo = hi)");
    if (n.var.index >= lvl(n.lo) || n.var.index >= lvl(n.hi))
      throw StructuralError("node " + std::to_string(i) + " violates the variable order");
  }
  {
    std::unordered_set<Node, TripleHash> triples;
    for (NodeId i = 2; i < nodes.size(); ++i)
      if (!triples.insert(nodes[i]).second)
        throw StructuralError("node " + std::to_string(i) + " duplicates another (var, lo, hi)");
  }

  // Lo-first preorder discovery, then a stable sort by level.
  std::vector<NodeId> discovery;
  std::vector<bool> visited(nodes.size(), false);
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    if (n < 2 || visited[n]) continue;
    visited[n] = true;
    discovery.push_back(n);
    stack.push_back(nodes[n].hi);
    stack.push_back(nodes[n].lo);
  }
  if (discovery.size() != nodes.size() - 2)
    throw StructuralError("diagram contains nodes unreachable from the root");
  std::stable_sort(discovery.begin(), discovery.end(),
                   [&](NodeId a, NodeId b) { return nodes[a].var.index < nodes[b].var.index; });

  std::vector<NodeId> remap(nodes.size());
  remap[0] = 0;
  remap[1] = 1;
  for (std::size_t i = 0; i < discovery.size(); ++i) remap[discovery[i]] = static_cast<NodeId>(i + 2);

  Obdd out;
  out.vars_ = std::move(vars);
  const VarId sentinel{nvars};
  out.nodes_.assign(nodes.size(), Node{sentinel, kFalseNode, kFalseNode});
  out.nodes_[1] = Node{sentinel, kTrueNode, kTrueNode};
  for (NodeId old : discovery) {
    const Node& n = nodes[old];
    out.nodes_[remap[old]] = Node{n.var, remap[n.lo], remap[n.hi]};
  }
  out.root_ = remap[root];
  out.index();
  return out;
}

void Obdd::index() {
  const auto nvars = static_cast<std::uint32_t>(vars_->size());
  levels_.resize(nodes_.size());
  levels_[0] = levels_[1] = nvars;
  for (NodeId i = 2; i < nodes_.size(); ++i) levels_[i] = nodes_[i].var.index;

  by_var_offsets_.assign(nvars + 1, 0);
  for (NodeId i = 2; i < nodes_.size(); ++i) ++by_var_offsets_[nodes_[i].var.index + 1];
  std::partial_sum(by_var_offsets_.begin(), by_var_offsets_.end(), by_var_offsets_.begin());
  by_var_.resize(nodes_.size() - 2);
  {
    auto cursor = by_var_offsets_;
    for (NodeId i = 2; i < nodes_.size(); ++i) by_var_[cursor[nodes_[i].var.index]++] = i;
  }

  parent_offsets_.assign(nodes_.size() + 1, 0);
  for (NodeId i = 2; i < nodes_.size(); ++i) {
    ++parent_offsets_[nodes_[i].lo + 1];
    ++parent_offsets_[nodes_[i].hi + 1];
  }
  std::partial_sum(parent_offsets_.begin(), parent_offsets_.end(), parent_offsets_.begin());
  parents_.resize(parent_offsets_.back());
  auto cursor = parent_offsets_;
  for (NodeId i = 2; i < nodes_.size(); ++i) {
    parents_[cursor[nodes_[i].lo]++] = i;
    parents_[cursor[nodes_[i].hi]++] = i;
  }
}

NodeId Obdd::first_at_or_below(std::uint32_t level) const {
  auto begin = levels_.begin() + 2;
  return static_cast<NodeId>(std::lower_bound(begin, levels_.end(), level) - levels_.begin());
}

std::vector<NodeId> Obdd::topo_order() const {
  std::vector<NodeId> out;
  out.reserve(nodes_.size());
  for (NodeId i = 2; i < nodes_.size(); ++i) out.push_back(i);
  out.push_back(kFalseNode);
  out.push_back(kTrueNode);
  return out;
}

std::span<const NodeId> Obdd::nodes_of(VarId var) const {
  if (var.index >= vars_->size()) return {};
  return std::span<const NodeId>(by_var_).subspan(by_var_offsets_[var.index],
                                                  by_var_offsets_[var.index + 1] - by_var_offsets_[var.index]);
}

std::span<const NodeId> Obdd::parents(NodeId id) const {
  return std::span<const NodeId>(parents_).subspan(parent_offsets_[id], parent_offsets_[id + 1] - parent_offsets_[id]);
}

bool Obdd::eval(const std::vector<bool>& assignment) const {
  if (assignment.size() != vars_->size()) throw std::invalid_argument("assignment size does not match variable table");
  NodeId n = root_;
  while (!is_terminal(n)) n = assignment[nodes_[n].var.index] ? nodes_[n].hi : nodes_[n].lo;
  return n == kTrueNode;
}

bool operator==(const Obdd& a, const Obdd& b) {
  if (a.vars_ != b.vars_ && !(*a.vars_ == *b.vars_)) return false;
  return a.root_ == b.root_ && a.nodes_ == b.nodes_;
}

// ---------------------------------------------------------------------------
// Free functions

Obdd apply(BoolOp op, const Obdd& a, const Obdd& b) {
  if (a.vars_ptr() != b.vars_ptr() && !(a.vars() == b.vars()))
    throw StructuralError("apply: operands use different variable tables");
  ObddBuilder builder(a.vars_ptr());
  auto import = [&](const Obdd& d) {
    std::vector<NodeId> ids(d.size());
    ids[0] = kFalseNode;
    ids[1] = kTrueNode;
    for (NodeId i = static_cast<NodeId>(d.size()); i-- > 2;) {
      const Node& n = d.node(i);
      ids[i] = builder.mk_node(n.var, ids[n.lo], ids[n.hi]);
    }
    return ids[d.root()];
  };
  const NodeId ra = import(a);
  const NodeId rb = import(b);
  return builder.extract(builder.apply(op, ra, rb));
}

Obdd from_dnf(std::shared_ptr<const VariableTable> vars, std::span<const Cube> cubes) {
  ObddBuilder builder(std::move(vars));
  return builder.extract(builder.disjunction(cubes));
}

std::string dump_obdd(const Obdd& obdd) {
  std::ostringstream os;
  for (const auto& v : obdd.vars().all()) {
    os << "var " << v.name;
    if (v.is_decision())
      os << " decision\n";
    else
      os << " stochastic " << format_real(v.prob) << '\n';
  }
  for (NodeId i = static_cast<NodeId>(obdd.size()); i-- > 2;) {
    const Node& n = obdd.node(i);
    os << "node " << i << ' ' << obdd.vars()[n.var].name << ' ' << n.lo << ' ' << n.hi << '\n';
  }
  os << "root " << obdd.root() << '\n';
  return os.str();
}

Obdd load_obdd(std::string_view text) {
  struct NodeLine {
    std::size_t line;
    std::uint64_t id;
    std::string var;
    std::uint64_t lo, hi;
  };
  auto table = std::make_shared<VariableTable>();
  std::vector<std::string> order;
  std::size_t order_line = 0;
  std::vector<NodeLine> node_lines;
  std::unordered_map<std::uint64_t, std::size_t> defined;  // file id -> index in node_lines
  std::optional<std::uint64_t> root;
  std::size_t root_line = 0;

  auto parse_id = [](std::size_t ln, std::string_view tok) {
    auto v = detail::parse_uint(tok);
    if (!v) throw ParseError(ln, "expected a node id, got '" + std::string(tok) + "'");
    return *v;
  };

  for (const auto& [ln, toks] : detail::tokenize_lines(text)) {
    const std::string_view kw = toks[0];
    if (kw == "var") {
      if (!node_lines.empty()) throw ParseError(ln, "variables must be declared before nodes");
      if (toks.size() < 3) throw ParseError(ln, "expected 'var <name> decision|stochastic <p>'");
      const std::string name(toks[1]);
      if (table->find(name)) throw ParseError(ln, "variable '" + name + "' declared twice");
      if (toks[2] == "decision" && toks.size() == 3) {
        table->add_decision(name);
      } else if (toks[2] == "stochastic" && toks.size() == 4) {
        auto p = detail::parse_real(toks[3]);
        if (!p) throw ParseError(ln, "bad probability '" + std::string(toks[3]) + "'");
        if (!(*p >= 0.0 && *p <= 1.0)) throw ParseError(ln, "probability outside [0,1]");
        table->add_stochastic(name, *p);
      } else {
        throw ParseError(ln, "expected 'var <name> decision|stochastic <p>'");
      }
    } else if (kw == "order") {
      if (order_line != 0) throw ParseError(ln, "duplicate order directive");
      if (!node_lines.empty()) throw ParseError(ln, "order must precede nodes");
      order_line = ln;
      for (std::size_t i = 1; i < toks.size(); ++i) order.emplace_back(toks[i]);
    } else if (kw == "node") {
      if (toks.size() != 5) throw ParseError(ln, "expected 'node <id> <var> <lo> <hi>'");
      NodeLine nl{ln, parse_id(ln, toks[1]), std::string(toks[2]), parse_id(ln, toks[3]), parse_id(ln, toks[4])};
      if (nl.id < 2) throw ParseError(ln, "node ids 0 and 1 are reserved for terminals");
      if (defined.contains(nl.id)) throw ParseError(ln, "node " + std::to_string(nl.id) + " defined twice");
      for (auto child : {nl.lo, nl.hi})
        if (child >= 2 && !defined.contains(child))
          throw ParseError(ln, "child " + std::to_string(child) + " is not defined on an earlier line");
      if (nl.lo == nl.hi) throw ParseError(ln, "redundant node (lo = hi)");
      if (!table->find(nl.var)) throw ParseError(ln, "unknown variable '" + nl.var + "'");
      defined.emplace(nl.id, node_lines.size());
      node_lines.push_back(std::move(nl));
    } else if (kw == "root") {
      if (root) throw ParseError(ln, "duplicate root directive");
      if (toks.size() != 2) throw ParseError(ln, "expected 'root <id>'");
      root = parse_id(ln, toks[1]);
      root_line = ln;
      if (*root >= 2 && !defined.contains(*root)) throw ParseError(ln, "root refers to an undefined node");
    } else {
      throw ParseError(ln, "unknown directive '" + std::string(kw) + "'");
    }
  }
  if (!root) throw ParseError(0, "missing root directive");
  if (!order.empty()) {
    try {
      table->reorder(order);
    } catch (const std::invalid_argument& e) {
      throw ParseError(order_line, e.what());
    }
  }

  std::vector<Node> nodes(node_lines.size() + 2);
  auto dense = [&](std::uint64_t file_id) -> NodeId {
    return file_id < 2 ? static_cast<NodeId>(file_id) : static_cast<NodeId>(defined.at(file_id) + 2);
  };
  auto level_of = [&](std::uint64_t file_id) -> std::uint32_t {
    if (file_id < 2) return kTerminalLevel;
    return table->at(node_lines[defined.at(file_id)].var).index;
  };
  std::unordered_set<Node, TripleHash> triples;
  for (std::size_t i = 0; i < node_lines.size(); ++i) {
    const auto& nl = node_lines[i];
    const VarId var = table->at(nl.var);
    if (var.index >= level_of(nl.lo) || var.index >= level_of(nl.hi))
      throw ParseError(nl.line, "node " + std::to_string(nl.id) + " violates the variable order");
    nodes[i + 2] = Node{var, dense(nl.lo), dense(nl.hi)};
    if (!triples.insert(nodes[i + 2]).second)
      throw ParseError(nl.line, "node " + std::to_string(nl.id) + " duplicates another (var, lo, hi)");
  }
  try {
    return Obdd::from_nodes(table, std::move(nodes), dense(*root));
  } catch (const StructuralError& e) {
    throw ParseError(root_line, e.what());
  }
}

std::string to_dot(const Obdd& obdd, std::string_view graph_name) {
  std::ostringstream os;
  os << "digraph " << graph_name << " {\n";
  os << "  n0 [shape=plaintext,label=\"0\"];\n";
  os << "  n1 [shape=plaintext,label=\"1\"];\n";
  for (NodeId i = 2; i < obdd.size(); ++i) {
    const Node& n = obdd.node(i);
    const VarInfo& v = obdd.vars()[n.var];
    os << "  n" << i << " [shape=" << (v.is_decision() ? "box" : "circle") << ",label=\"" << v.name << "\"];\n";
  }
  for (NodeId i = 2; i < obdd.size(); ++i) {
    const Node& n = obdd.node(i);
    const VarInfo& v = obdd.vars()[n.var];
    os << "  n" << i << " -> n" << n.hi << " [style=solid";
    if (!v.is_decision()) os << ",label=\"" << format_real(v.prob) << '"';
    os << "];\n";
    os << "  n" << i << " -> n" << n.lo << " [style=dashed";
    if (!v.is_decision()) os << ",label=\"" << format_real(1.0 - v.prob) << '"';
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace scop
