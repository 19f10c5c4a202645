#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "scop/propagate.hpp"

namespace scop {

/// sum_i r_i P(phi_i | sigma) >= theta.
struct StochasticConstraint {
  std::vector<ConstraintTerm> terms;
  double theta = 0.0;
};

/// maximize sum_i r_i P(phi_i | sigma).
struct Objective {
  std::vector<ConstraintTerm> terms;
};

struct Problem {
  std::shared_ptr<const VariableTable> vars;
  std::vector<StochasticConstraint> constraints;
  /// Upper bound on the number of decision variables set to true.
  std::optional<std::size_t> cardinality;
  std::optional<Objective> objective;

  /// Throws std::invalid_argument when the problem is empty, a reward is
  /// negative, or a term uses a different variable table.
  void validate() const;
};

struct SearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t backtracks = 0;
  std::uint64_t propagator_calls = 0;
  std::uint64_t node_visits = 0;
  double wall_seconds = 0.0;

  SearchStats& operator+=(const SearchStats& o);
};

/// Complete assignment to the decision variables, indexed by variable index
/// (stochastic slots are false and carry no meaning).
struct Strategy {
  std::vector<bool> values;

  bool operator[](VarId v) const { return values[v.index]; }
  friend bool operator==(const Strategy&, const Strategy&) = default;
};

enum class SolveStatus { Sat, Unsat };

struct SolveResult {
  SolveStatus status = SolveStatus::Unsat;
  std::optional<Strategy> strategy;
  /// Objective value of the strategy (0 without an objective).
  double value = 0.0;
  SearchStats stats;
};

/// count(true) > N fails; count(true) = N fixes every free variable false.
PropagationResult cardinality_propagate(const DomainState& domains, std::size_t bound);

/// Cardinality first, then every stochastic constraint, repeated until no
/// propagator fixes anything. `fixed` accumulates every fix in order.
PropagationResult propagation_loop(const DomainState& domains, const Problem& problem);

/// Depth-first search: branch on the first free variable in order, true
/// first, with propagation at every node. Returns the first strategy that
/// satisfies every constraint (objective ignored).
SolveResult solve_sat(const Problem& problem);

/// Threshold ramping: solve with the objective recast as a constraint >= theta,
/// then raise theta to the found value + `step` until unsatisfiable.
SolveResult solve_opt(const Problem& problem, double step = 1e-9);

/// Direct evaluation, independent of propagation.
double terms_value(const std::vector<ConstraintTerm>& terms, const Strategy& s);
bool satisfies(const Problem& problem, const Strategy& s);

}  // namespace scop
