#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "scop/evaluate.hpp"
#include "scop/obdd.hpp"

namespace scop {

/// Per-node values, indexed by NodeId. v[0] = 0 and v[1] = 1.
using NodeValues = std::vector<double>;

/// Per-node path weights, indexed by NodeId. The root carries 1.
using PathWeights = std::vector<double>;

/// Indexed by variable index. Only free decision variables carry a value;
/// every other slot is 0.
using Derivatives = std::vector<double>;

/// Slack on threshold comparisons: a score s satisfies the threshold when
/// s >= theta - kThresholdSlack.
inline constexpr double kThresholdSlack = 1e-9;

/// One summand r * P(phi | sigma) of a stochastic constraint.
struct ConstraintTerm {
  std::shared_ptr<const Obdd> obdd;
  double reward = 1.0;
};

enum class PropagationStatus { Ok, Failed };

struct Fix {
  VarId var;
  bool value = true;

  friend bool operator==(const Fix&, const Fix&) = default;
};

struct VarDelta {
  VarId var;
  double delta = 0.0;
};

struct PropagationResult {
  PropagationStatus status = PropagationStatus::Ok;
  /// Newly forced values; every entry was free before the call. Empty when
  /// the status is Failed.
  std::vector<Fix> fixed;
  /// Optimistic value: the reward-weighted sum of root values with every
  /// free decision taken as true.
  double bound = 0.0;
  /// Reward-weighted derivative per free variable, when the propagator
  /// computes them.
  std::vector<VarDelta> deltas;
  /// Diagram nodes visited (plus one per free-variable check).
  std::uint64_t visits = 0;

  bool ok() const { return status == PropagationStatus::Ok; }
};

/// Top-down pass: the root gets 1, a decision node pushes its weight to the hi
/// child when true or free and to the lo child when false, a stochastic node
/// splits it w / 1-w. Terminals receive weight too.
PathWeights compute_path_weights(const Obdd& obdd, const DomainState& domains, std::uint64_t* visits = nullptr);

/// Bottom-up pass computing every node's value under free-as-true.
NodeValues compute_values(const Obdd& obdd, const DomainState& domains, std::uint64_t* visits = nullptr);

/// Delta_d = sum over d's nodes r of pi(r) * (v(hi) - v(lo)), for each free d.
Derivatives compute_derivatives(const Obdd& obdd, const PathWeights& pi, const NodeValues& v,
                                const DomainState& domains, std::uint64_t* visits = nullptr);

/// Domain-consistent propagation of sum_i r_i P(phi_i | sigma) >= theta in
/// O(m + n): one top-down and one bottom-up pass per term, derivatives folded
/// into the bottom-up pass. Removes `false` from every free variable whose
/// derivative would drop the bound below theta.
PropagationResult dc_propagate(std::span<const ConstraintTerm> terms, const DomainState& domains, double theta);

/// Same contract as dc_propagate, computed by re-evaluating every term once
/// per free variable (O(mn)).
PropagationResult naive_propagate(std::span<const ConstraintTerm> terms, const DomainState& domains, double theta);

/// Applies `result.fixed` to `domains`. No-op for a failed result.
void apply_fixes(const PropagationResult& result, DomainState& domains);

/// Path weights and values of one diagram, kept consistent with a private
/// copy of the domains and updated in place when a variable is fixed.
/// Every overwrite is trailed so a search can roll back to a mark.
class PropagationScratch {
 public:
  PropagationScratch(std::shared_ptr<const Obdd> obdd, const DomainState& domains);

  /// Full recompute under `domains`. Clears the trail.
  void recompute(const DomainState& domains);

  /// Fixes a free variable and repairs pi and v. Fixing to true touches
  /// nothing. Fixing to false recomputes path weights strictly below the
  /// variable's level and values at or above it. Returns the number of nodes
  /// recomputed. Throws std::invalid_argument if `var` is not free.
  std::uint64_t incremental_fix(VarId var, bool value);

  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t mark);

  const Obdd& obdd() const { return *obdd_; }
  const DomainState& domains() const { return domains_; }
  const PathWeights& path_weights() const { return pi_; }
  const NodeValues& values() const { return v_; }
  double root_value() const { return v_[obdd_->root()]; }

 private:
  enum class Slot : std::uint8_t { PathWeight, Value, Domain };
  struct TrailEntry {
    Slot slot;
    std::uint32_t index;
    double old_value;
    scop::Domain old_domain;
  };

  std::shared_ptr<const Obdd> obdd_;
  DomainState domains_;
  PathWeights pi_;
  NodeValues v_;
  std::vector<TrailEntry> trail_;
};

/// A scratch together with the reward of its term.
struct ScratchTerm {
  const PropagationScratch* scratch;
  double reward = 1.0;
};

/// The domain-consistency test of dc_propagate, run on scratches that are
/// already up to date. All scratches must share the same domains.
PropagationResult dc_check(std::span<const ScratchTerm> terms, double theta);

}  // namespace scop
