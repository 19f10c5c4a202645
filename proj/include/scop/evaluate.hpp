#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scop/obdd.hpp"
#include "scop/variables.hpp"

namespace scop {

enum class Domain : std::uint8_t { FalseOnly, TrueOnly, Both };

/// Per-decision-variable domains. Entries are indexed by variable index;
/// stochastic slots exist only to keep indexing dense and are never read.
class DomainState {
 public:
  DomainState() = default;
  /// Every decision variable starts free.
  explicit DomainState(const VariableTable& vars);

  /// Decision variables fixed as given; `strategy` is indexed by variable
  /// index, stochastic slots are ignored.
  static DomainState from_strategy(const VariableTable& vars, const std::vector<bool>& strategy);

  Domain get(VarId var) const;
  void set(VarId var, Domain d);
  void fix(VarId var, bool value) { set(var, value ? Domain::TrueOnly : Domain::FalseOnly); }

  bool is_free(VarId var) const { return get(var) == Domain::Both; }
  bool is_decision(VarId var) const { return var.index < mask_.size() && mask_[var.index]; }

  /// Free-as-true: the branch a decision node takes under the optimistic
  /// completion. Unchecked; `var` must be a decision variable.
  bool takes_hi(VarId var) const { return doms_[var.index] != Domain::FalseOnly; }

  /// Number of variable slots (decision and stochastic).
  std::size_t size() const { return doms_.size(); }
  const std::vector<VarId>& decisions() const { return decisions_; }
  std::vector<VarId> free_vars() const;
  std::size_t count(Domain d) const;
  bool all_fixed() const { return count(Domain::Both) == 0; }

  friend bool operator==(const DomainState&, const DomainState&) = default;

 private:
  std::vector<Domain> doms_;
  std::vector<bool> mask_;
  std::vector<VarId> decisions_;
};

/// Value of the root after one bottom-up pass, free decisions taken as true.
/// Equals P(phi | strategy) when every decision is fixed.
double evaluate(const Obdd& obdd, const DomainState& domains);

/// Probability mass of one complete assignment restricted to the models of
/// the diagram: the product of p or 1-p over stochastic variables if the
/// diagram accepts the assignment, 0 otherwise. Throws std::invalid_argument
/// if any variable is unassigned.
double model_probability(const Obdd& obdd, const std::vector<std::optional<bool>>& assignment);

}  // namespace scop
