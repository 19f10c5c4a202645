#include "scop/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

namespace scop {

DomainState::DomainState(const VariableTable& vars)
    : doms_(vars.size(), Domain::Both), mask_(vars.size(), false), decisions_(vars.decisions()) {
  for (VarId d : decisions_) mask_[d.index] = true;
}

DomainState DomainState::from_strategy(const VariableTable& vars, const std::vector<bool>& strategy) {
  if (strategy.size() != vars.size()) throw std::invalid_argument("strategy size does not match variable table");
  DomainState s(vars);
  for (VarId d : s.decisions_) s.fix(d, strategy[d.index]);
  return s;
}

Domain DomainState::get(VarId var) const {
  if (!is_decision(var)) throw std::invalid_argument("not a decision variable: index " + std::to_string(var.index));
  return doms_[var.index];
}

void DomainState::set(VarId var, Domain d) {
  if (!is_decision(var)) throw std::invalid_argument("not a decision variable: index " + std::to_string(var.index));
  doms_[var.index] = d;
}

std::vector<VarId> DomainState::free_vars() const {
  std::vector<VarId> out;
  for (VarId d : decisions_)
    if (doms_[d.index] == Domain::Both) out.push_back(d);
  return out;
}

std::size_t DomainState::count(Domain d) const {
  return static_cast<std::size_t>(
      std::count_if(decisions_.begin(), decisions_.end(), [&](VarId v) { return doms_[v.index] == d; }));
}

double evaluate(const Obdd& obdd, const DomainState& domains) {
  std::vector<double> v(obdd.size());
  v[kFalseNode] = 0.0;
  v[kTrueNode] = 1.0;
  const VariableTable& vars = obdd.vars();
  for (NodeId i = static_cast<NodeId>(obdd.size()); i-- > 2;) {
    const Node& n = obdd.node(i);
    const VarInfo& info = vars[n.var];
    if (info.is_decision()) {
      v[i] = domains.takes_hi(n.var) ? v[n.hi] : v[n.lo];
    } else {
      v[i] = info.prob * v[n.hi] + (1.0 - info.prob) * v[n.lo];
    }
  }
  return v[obdd.root()];
}

double model_probability(const Obdd& obdd, const std::vector<std::optional<bool>>& assignment) {
  const VariableTable& vars = obdd.vars();
  if (assignment.size() != vars.size()) throw std::invalid_argument("assignment size does not match variable table");
  std::vector<bool> full(vars.size());
  double weight = 1.0;
  for (const auto& info : vars.all()) {
    const auto& a = assignment[info.id.index];
    if (!a) throw std::invalid_argument("variable '" + info.name + "' is unassigned");
    full[info.id.index] = *a;
    if (!info.is_decision()) weight *= *a ? info.prob : 1.0 - info.prob;
  }
  return obdd.eval(full) ? weight : 0.0;
}

}  // namespace scop
