#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scop/propagate.hpp"

namespace scop {

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Either a continuous value variable (index >= 0) or a constant.
struct ValueRef {
  std::int32_t index = -1;
  double constant = 0.0;

  bool is_constant() const { return index < 0; }
};

/// v = w v(hi) + (1-w) v(lo) for a stochastic node, or
/// v = (1-d) v(lo) + d v(hi) for a decision node d in {0,1}.
struct NodeEquation {
  std::size_t term = 0;
  NodeId node = 0;
  VarId var;
  bool decision = false;
  double weight = 0.0;  // probability of a stochastic node
  ValueRef lo;
  ValueRef hi;
};

/// The decomposed form of sum_i r_i P(phi_i | sigma) >= theta: one value
/// variable and one defining equation per internal diagram node, plus the
/// threshold inequality over the root values.
struct LinearSystem {
  std::shared_ptr<const VariableTable> vars;
  std::vector<std::string> names;        // one per value variable
  std::vector<NodeEquation> equations;   // equations[i] defines value variable i
  std::vector<ValueRef> roots;           // one per term
  std::vector<double> rewards;           // one per term
  double theta = 0.0;
};

LinearSystem decompose(std::span<const ConstraintTerm> terms, double theta);

/// Human-readable listing, lo branch first in every equation.
std::string format_system(const LinearSystem& system);

struct BoundsResult {
  PropagationResult result;
  /// Intervals implied by the defining equations alone, before the threshold
  /// inequality is applied.
  std::vector<Interval> initial;
  /// Fixpoint intervals with the threshold inequality.
  std::vector<Interval> intervals;
  /// Interval of sum_i r_i v_i(root) at the fixpoint.
  Interval total;
  std::size_t revisions = 0;
  bool hit_cap = false;
};

/// Interval bounds propagation over the system. Decision domains are pruned
/// only when an interval excludes one branch of a decision equation.
/// `start` seeds the value intervals (defaults to [0,1] each).
BoundsResult bounds_propagate(const LinearSystem& system, const DomainState& domains,
                              const std::optional<std::vector<Interval>>& start = std::nullopt);

}  // namespace scop
