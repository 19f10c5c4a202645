#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scop/obdd.hpp"
#include "scop/solver.hpp"

namespace scop {

struct NetworkEdge {
  std::string u;
  std::string v;
  double prob = 0.0;
};

/// Undirected probabilistic network.
struct ProbNetwork {
  std::vector<std::string> nodes;
  std::vector<NetworkEdge> edges;

  bool has_node(std::string_view name) const;
};

struct Query {
  std::string source;
  std::string target;
  double reward = 1.0;
};

enum class ProblemMode { Maximize, Constraint };

/// Parsed problem file, before compilation.
struct ProblemSpec {
  ProbNetwork network;
  std::vector<Query> queries;
  std::optional<std::size_t> cardinality;
  ProblemMode mode = ProblemMode::Maximize;
  double theta = 0.0;  // Constraint mode only
  std::vector<std::string> order;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&);
};

/// Problem file format (`#` comments):
///   node <name>
///   edge <u> <v> <p>
///   query <s> <t> [reward <r>]
///   cardinality <= <N>
///   objective maximize | constraint >= <theta>
///   order <varname> ...
/// Throws ParseError with the offending line number.
ProblemSpec parse_problem(std::string_view text);

/// Canonical text form; parse_problem(format_problem(x)) == x.
std::string format_problem(const ProblemSpec& spec);

/// Names of the per-edge stochastic and decision variables: t_<u><v> and
/// d_<u><v> when both endpoints are single characters, t_<u>_<v> otherwise.
std::string stochastic_var_name(const NetworkEdge& e);
std::string decision_var_name(const NetworkEdge& e);

/// Variables of the network: t_e then d_e per edge in declaration order,
/// then the `order` override applied.
std::shared_ptr<VariableTable> network_variables(const ProblemSpec& spec);

inline constexpr std::size_t kDefaultPathCap = 10000;

/// One cube {d_e, t_e for e on the path} per simple source-target path.
/// Throws CapacityError beyond `cap` paths.
std::vector<Cube> st_path_dnf(const ProbNetwork& network, const VariableTable& vars, const Query& query,
                              std::size_t cap = kDefaultPathCap);

struct BuiltProblem {
  Problem problem;
  /// One term per query, in file order.
  std::vector<ConstraintTerm> query_terms;
};

BuiltProblem build_problem(const ProblemSpec& spec, std::size_t path_cap = kDefaultPathCap);

}  // namespace scop
