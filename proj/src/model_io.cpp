#include "scop/model_io.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "scop/errors.hpp"
#include "text_util.hpp"

namespace scop {

bool ProbNetwork::has_node(std::string_view name) const {
  return std::find(nodes.begin(), nodes.end(), name) != nodes.end();
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  auto edges_eq = [](const NetworkEdge& x, const NetworkEdge& y) {
    return x.u == y.u && x.v == y.v && x.prob == y.prob;
  };
  auto queries_eq = [](const Query& x, const Query& y) {
    return x.source == y.source && x.target == y.target && x.reward == y.reward;
  };
  return a.network.nodes == b.network.nodes &&
         std::equal(a.network.edges.begin(), a.network.edges.end(), b.network.edges.begin(), b.network.edges.end(),
                    edges_eq) &&
         std::equal(a.queries.begin(), a.queries.end(), b.queries.begin(), b.queries.end(), queries_eq) &&
         a.cardinality == b.cardinality && a.mode == b.mode && a.theta == b.theta && a.order == b.order;
}

ProblemSpec parse_problem(std::string_view text) {
  ProblemSpec spec;
  bool have_mode = false;
  bool have_order = false;
  std::set<std::pair<std::string, std::string>> seen_edges;

  auto real = [](std::size_t ln, std::string_view tok, const char* what) {
    auto v = detail::parse_real(tok);
    if (!v) throw ParseError(ln, std::string("bad ") + what + " '" + std::string(tok) + "'");
    return *v;
  };
  auto node = [&](std::size_t ln, std::string_view name) {
    if (!spec.network.has_node(name)) throw ParseError(ln, "unknown node '" + std::string(name) + "'");
    return std::string(name);
  };

  for (const auto& [ln, toks] : detail::tokenize_lines(text)) {
    const std::string_view kw = toks[0];
    if (kw == "node") {
      if (toks.size() != 2) throw ParseError(ln, "expected 'node <name>'");
      if (spec.network.has_node(toks[1])) throw ParseError(ln, "duplicate node '" + std::string(toks[1]) + "'");
      spec.network.nodes.emplace_back(toks[1]);
    } else if (kw == "edge") {
      if (toks.size() != 4) throw ParseError(ln, "expected 'edge <u> <v> <p>'");
      NetworkEdge e{node(ln, toks[1]), node(ln, toks[2]), real(ln, toks[3], "probability")};
      if (e.u == e.v) throw ParseError(ln, "self-loop on '" + e.u + "'");
      if (!(e.prob >= 0.0 && e.prob <= 1.0)) throw ParseError(ln, "probability outside [0,1]");
      if (!seen_edges.insert(std::minmax(e.u, e.v)).second)
        throw ParseError(ln, "duplicate edge " + e.u + "-" + e.v);
      spec.network.edges.push_back(std::move(e));
    } else if (kw == "query") {
      if (toks.size() != 3 && !(toks.size() == 5 && toks[3] == "reward"))
        throw ParseError(ln, "expected 'query <s> <t> [reward <r>]'");
      Query q{node(ln, toks[1]), node(ln, toks[2]), 1.0};
      if (q.source == q.target) throw ParseError(ln, "query source equals target");
      if (toks.size() == 5) q.reward = real(ln, toks[4], "reward");
      if (!(q.reward >= 0.0)) throw ParseError(ln, "reward must be nonnegative");
      spec.queries.push_back(std::move(q));
    } else if (kw == "cardinality") {
      if (spec.cardinality) throw ParseError(ln, "duplicate cardinality directive");
      if (toks.size() != 3 || toks[1] != "<=") throw ParseError(ln, "expected 'cardinality <= <N>'");
      auto n = detail::parse_uint(toks[2]);
      if (!n) throw ParseError(ln, "bad cardinality bound '" + std::string(toks[2]) + "'");
      spec.cardinality = static_cast<std::size_t>(*n);
    } else if (kw == "objective") {
      if (have_mode) throw ParseError(ln, "duplicate objective/constraint directive");
      if (toks.size() != 2 || toks[1] != "maximize") throw ParseError(ln, "expected 'objective maximize'");
      spec.mode = ProblemMode::Maximize;
      have_mode = true;
    } else if (kw == "constraint") {
      if (have_mode) throw ParseError(ln, "duplicate objective/constraint directive");
      if (toks.size() != 3 || toks[1] != ">=") throw ParseError(ln, "expected 'constraint >= <theta>'");
      spec.mode = ProblemMode::Constraint;
      spec.theta = real(ln, toks[2], "threshold");
      if (!(spec.theta >= 0.0)) throw ParseError(ln, "threshold must be nonnegative");
      have_mode = true;
    } else if (kw == "order") {
      if (have_order) throw ParseError(ln, "duplicate order directive");
      have_order = true;
      for (std::size_t i = 1; i < toks.size(); ++i) spec.order.emplace_back(toks[i]);
    } else {
      throw ParseError(ln, "unknown directive '" + std::string(kw) + "'");
    }
  }
  if (spec.network.nodes.empty()) throw ParseError(0, "problem declares no nodes");
  if (spec.queries.empty()) throw ParseError(0, "problem declares no queries");
  if (!have_mode) throw ParseError(0, "missing 'objective maximize' or 'constraint >= <theta>'");
  if (have_order) {
    try {
      network_variables(spec);
    } catch (const std::invalid_argument& e) {
      throw ParseError(0, e.what());
    }
  }
  return spec;
}

std::string format_problem(const ProblemSpec& spec) {
  std::ostringstream os;
  for (const auto& n : spec.network.nodes) os << "node " << n << '\n';
  for (const auto& e : spec.network.edges) os << "edge " << e.u << ' ' << e.v << ' ' << format_real(e.prob) << '\n';
  for (const auto& q : spec.queries)
    os << "query " << q.source << ' ' << q.target << " reward " << format_real(q.reward) << '\n';
  if (spec.cardinality) os << "cardinality <= " << *spec.cardinality << '\n';
  if (spec.mode == ProblemMode::Maximize)
    os << "objective maximize\n";
  else
    os << "constraint >= " << format_real(spec.theta) << '\n';
  if (!spec.order.empty()) {
    os << "order";
    for (const auto& v : spec.order) os << ' ' << v;
    os << '\n';
  }
  return os.str();
}

namespace {

std::string edge_suffix(const NetworkEdge& e) {
  return e.u.size() == 1 && e.v.size() == 1 ? e.u + e.v : e.u + "_" + e.v;
}

}  // namespace

std::string stochastic_var_name(const NetworkEdge& e) { return "t_" + edge_suffix(e); }
std::string decision_var_name(const NetworkEdge& e) { return "d_" + edge_suffix(e); }

std::shared_ptr<VariableTable> network_variables(const ProblemSpec& spec) {
  auto vars = std::make_shared<VariableTable>();
  for (const auto& e : spec.network.edges) {
    vars->add_stochastic(stochastic_var_name(e), e.prob);
    vars->add_decision(decision_var_name(e));
  }
  if (!spec.order.empty()) vars->reorder(spec.order);
  return vars;
}

std::vector<Cube> st_path_dnf(const ProbNetwork& network, const VariableTable& vars, const Query& query,
                              std::size_t cap) {
  if (!network.has_node(query.source) || !network.has_node(query.target))
    throw std::invalid_argument("query refers to an unknown node");
  if (query.source == query.target) throw std::invalid_argument("query source equals target");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < network.nodes.size(); ++i) index.emplace(network.nodes[i], i);
  struct Arc {
    std::size_t to;
    std::size_t edge;
  };
  std::vector<std::vector<Arc>> adj(network.nodes.size());
  for (std::size_t k = 0; k < network.edges.size(); ++k) {
    const auto& e = network.edges[k];
    adj[index.at(e.u)].push_back(Arc{index.at(e.v), k});
    adj[index.at(e.v)].push_back(Arc{index.at(e.u), k});
  }
  std::vector<std::pair<VarId, VarId>> edge_vars;
  for (const auto& e : network.edges)
    edge_vars.emplace_back(vars.at(decision_var_name(e)), vars.at(stochastic_var_name(e)));

  const std::size_t source = index.at(query.source);
  const std::size_t target = index.at(query.target);
  std::vector<Cube> cubes;
  std::vector<bool> on_path(network.nodes.size(), false);
  std::vector<std::size_t> path_edges;

  // Depth-first over simple paths; explicit frames keep deep networks off the
  // call stack.
  struct Frame {
    std::size_t node;
    std::size_t next_arc;
  };
  std::vector<Frame> stack{{source, 0}};
  on_path[source] = true;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_arc == adj[f.node].size()) {
      on_path[f.node] = false;
      stack.pop_back();
      if (!path_edges.empty()) path_edges.pop_back();
      continue;
    }
    const Arc arc = adj[f.node][f.next_arc++];
    if (on_path[arc.to]) continue;
    if (arc.to == target) {
      if (cubes.size() == cap)
        throw CapacityError("more than " + std::to_string(cap) + " simple paths from " + query.source + " to " +
                            query.target + "; use a smaller instance");
      Cube c;
      for (std::size_t e : path_edges) {
        c.vars.push_back(edge_vars[e].first);
        c.vars.push_back(edge_vars[e].second);
      }
      c.vars.push_back(edge_vars[arc.edge].first);
      c.vars.push_back(edge_vars[arc.edge].second);
      cubes.push_back(std::move(c));
      continue;
    }
    on_path[arc.to] = true;
    path_edges.push_back(arc.edge);
    stack.push_back(Frame{arc.to, 0});
  }
  return cubes;
}

BuiltProblem build_problem(const ProblemSpec& spec, std::size_t path_cap) {
  std::shared_ptr<const VariableTable> vars = network_variables(spec);
  BuiltProblem out;
  out.problem.vars = vars;
  ObddBuilder builder(vars);
  for (const auto& q : spec.queries) {
    const auto cubes = st_path_dnf(spec.network, *vars, q, path_cap);
    auto obdd = std::make_shared<const Obdd>(builder.extract(builder.disjunction(cubes)));
    out.query_terms.push_back(ConstraintTerm{std::move(obdd), q.reward});
  }
  out.problem.cardinality = spec.cardinality;
  if (spec.mode == ProblemMode::Maximize)
    out.problem.objective = Objective{out.query_terms};
  else
    out.problem.constraints.push_back(StochasticConstraint{out.query_terms, spec.theta});
  return out;
}

}  // namespace scop
