#include "scop/propagate.hpp"

#include <stdexcept>

namespace scop {

namespace {

void bump(std::uint64_t* visits, std::uint64_t n) {
  if (visits) *visits += n;
}

// Bottom-up values with the derivative accumulation folded in, so a full
// propagation costs one top-down and one bottom-up pass.
void values_and_derivatives(const Obdd& obdd, const DomainState& domains, const PathWeights& pi, NodeValues& v,
                            Derivatives& delta, double reward) {
  const VariableTable& vars = obdd.vars();
  v.assign(obdd.size(), 0.0);
  v[kTrueNode] = 1.0;
  for (NodeId i = static_cast<NodeId>(obdd.size()); i-- > 2;) {
    const Node& n = obdd.node(i);
    const VarInfo& info = vars[n.var];
    if (info.is_decision()) {
      const Domain d = domains.get(n.var);
      v[i] = d != Domain::FalseOnly ? v[n.hi] : v[n.lo];
      if (d == Domain::Both) delta[n.var.index] += reward * (pi[i] * (v[n.hi] - v[n.lo]));
    } else {
      v[i] = info.prob * v[n.hi] + (1.0 - info.prob) * v[n.lo];
    }
  }
}

PropagationResult threshold_test(const DomainState& domains, double bound, const Derivatives& delta, double theta,
                                 std::uint64_t visits) {
  PropagationResult res;
  res.bound = bound;
  res.visits = visits;
  if (bound < theta - kThresholdSlack) {
    res.status = PropagationStatus::Failed;
    return res;
  }
  for (VarId d : domains.free_vars()) {
    ++res.visits;
    res.deltas.push_back(VarDelta{d, delta[d.index]});
    if (bound - delta[d.index] < theta - kThresholdSlack) res.fixed.push_back(Fix{d, true});
  }
  return res;
}

}  // namespace

PathWeights compute_path_weights(const Obdd& obdd, const DomainState& domains, std::uint64_t* visits) {
  const VariableTable& vars = obdd.vars();
  PathWeights pi(obdd.size(), 0.0);
  pi[obdd.root()] = 1.0;
  for (NodeId i = 2; i < obdd.size(); ++i) {
    const Node& n = obdd.node(i);
    const VarInfo& info = vars[n.var];
    if (info.is_decision()) {
      if (domains.takes_hi(n.var))
        pi[n.hi] += pi[i];
      else
        pi[n.lo] += pi[i];
    } else {
      pi[n.hi] += info.prob * pi[i];
      pi[n.lo] += (1.0 - info.prob) * pi[i];
    }
  }
  bump(visits, obdd.internal_count());
  return pi;
}

NodeValues compute_values(const Obdd& obdd, const DomainState& domains, std::uint64_t* visits) {
  const VariableTable& vars = obdd.vars();
  NodeValues v(obdd.size(), 0.0);
  v[kTrueNode] = 1.0;
  for (NodeId i = static_cast<NodeId>(obdd.size()); i-- > 2;) {
    const Node& n = obdd.node(i);
    const VarInfo& info = vars[n.var];
    if (info.is_decision())
      v[i] = domains.takes_hi(n.var) ? v[n.hi] : v[n.lo];
    else
      v[i] = info.prob * v[n.hi] + (1.0 - info.prob) * v[n.lo];
  }
  bump(visits, obdd.internal_count());
  return v;
}

Derivatives compute_derivatives(const Obdd& obdd, const PathWeights& pi, const NodeValues& v,
                                const DomainState& domains, std::uint64_t* visits) {
  Derivatives delta(obdd.vars().size(), 0.0);
  for (VarId d : domains.free_vars()) {
    for (NodeId r : obdd.nodes_of(d)) {
      const Node& n = obdd.node(r);
      delta[d.index] += pi[r] * (v[n.hi] - v[n.lo]);
    }
    bump(visits, obdd.nodes_of(d).size());
  }
  return delta;
}

PropagationResult dc_propagate(std::span<const ConstraintTerm> terms, const DomainState& domains, double theta) {
  Derivatives delta(domains.size(), 0.0);
  double bound = 0.0;
  std::uint64_t visits = 0;
  NodeValues v;
  for (const auto& t : terms) {
    const PathWeights pi = compute_path_weights(*t.obdd, domains, &visits);
    values_and_derivatives(*t.obdd, domains, pi, v, delta, t.reward);
    visits += t.obdd->internal_count();
    bound += t.reward * v[t.obdd->root()];
  }
  return threshold_test(domains, bound, delta, theta, visits);
}

PropagationResult naive_propagate(std::span<const ConstraintTerm> terms, const DomainState& domains, double theta) {
  PropagationResult res;
  auto score = [&](const DomainState& s) {
    double total = 0.0;
    for (const auto& t : terms) {
      total += t.reward * evaluate(*t.obdd, s);
      res.visits += t.obdd->internal_count();
    }
    return total;
  };
  res.bound = score(domains);
  if (res.bound < theta - kThresholdSlack) {
    res.status = PropagationStatus::Failed;
    return res;
  }
  DomainState probe = domains;
  for (VarId d : domains.free_vars()) {
    ++res.visits;
    probe.fix(d, false);
    const double s = score(probe);
    probe.set(d, Domain::Both);
    res.deltas.push_back(VarDelta{d, res.bound - s});
    if (s < theta - kThresholdSlack) res.fixed.push_back(Fix{d, true});
  }
  return res;
}

void apply_fixes(const PropagationResult& result, DomainState& domains) {
  if (!result.ok()) return;
  for (const Fix& f : result.fixed) domains.fix(f.var, f.value);
}

// ---------------------------------------------------------------------------
// PropagationScratch

PropagationScratch::PropagationScratch(std::shared_ptr<const Obdd> obdd, const DomainState& domains)
    : obdd_(std::move(obdd)) {
  if (!obdd_) throw std::invalid_argument("PropagationScratch: null diagram");
  recompute(domains);
}

void PropagationScratch::recompute(const DomainState& domains) {
  domains_ = domains;
  pi_ = compute_path_weights(*obdd_, domains_);
  v_ = compute_values(*obdd_, domains_);
  trail_.clear();
}

std::uint64_t PropagationScratch::incremental_fix(VarId var, bool value) {
  if (!domains_.is_decision(var) || !domains_.is_free(var))
    throw std::invalid_argument("incremental_fix: variable is not free");
  trail_.push_back(TrailEntry{Slot::Domain, var.index, 0.0, domains_.get(var)});
  domains_.fix(var, value);
  if (value || obdd_->nodes_of(var).empty()) return 0;

  const Obdd& g = *obdd_;
  const VariableTable& vars = g.vars();
  const NodeId below = g.first_at_or_below(var.index + 1);
  std::uint64_t touched = 0;

  // Path weights strictly below the variable: pull from parents in ascending
  // id order, which reproduces the accumulation order of the full pass.
  auto pull = [&](NodeId i) {
    double acc = i == g.root() ? 1.0 : 0.0;
    for (NodeId p : g.parents(i)) {
      const Node& pn = g.node(p);
      const VarInfo& info = vars[pn.var];
      if (info.is_decision()) {
        const bool hi = domains_.takes_hi(pn.var);
        if ((hi ? pn.hi : pn.lo) == i) acc += pi_[p];
      } else if (pn.hi == i) {
        acc += info.prob * pi_[p];
      } else {
        acc += (1.0 - info.prob) * pi_[p];
      }
    }
    trail_.push_back(TrailEntry{Slot::PathWeight, i, pi_[i], Domain::Both});
    pi_[i] = acc;
    ++touched;
  };
  for (NodeId i = below; i < g.size(); ++i) pull(i);
  pull(kFalseNode);
  pull(kTrueNode);

  // Values at or above the variable.
  for (NodeId i = below; i-- > 2;) {
    const Node& n = g.node(i);
    const VarInfo& info = vars[n.var];
    const double next = info.is_decision() ? (domains_.takes_hi(n.var) ? v_[n.hi] : v_[n.lo])
                                           : info.prob * v_[n.hi] + (1.0 - info.prob) * v_[n.lo];
    trail_.push_back(TrailEntry{Slot::Value, i, v_[i], Domain::Both});
    v_[i] = next;
    ++touched;
  }
  return touched;
}

void PropagationScratch::undo(std::size_t mark) {
  while (trail_.size() > mark) {
    const TrailEntry e = trail_.back();
    trail_.pop_back();
    switch (e.slot) {
      case Slot::PathWeight: pi_[e.index] = e.old_value; break;
      case Slot::Value: v_[e.index] = e.old_value; break;
      case Slot::Domain: domains_.set(VarId{e.index}, e.old_domain); break;
    }
  }
}

PropagationResult dc_check(std::span<const ScratchTerm> terms, double theta) {
  if (terms.empty()) throw std::invalid_argument("dc_check: no terms");
  const DomainState& domains = terms.front().scratch->domains();
  Derivatives delta(domains.size(), 0.0);
  double bound = 0.0;
  std::uint64_t visits = 0;
  for (const auto& t : terms) {
    const PropagationScratch& s = *t.scratch;
    const Derivatives d = compute_derivatives(s.obdd(), s.path_weights(), s.values(), domains, &visits);
    for (std::size_t i = 0; i < d.size(); ++i) delta[i] += t.reward * d[i];
    bound += t.reward * s.root_value();
  }
  return threshold_test(domains, bound, delta, theta, visits);
}

}  // namespace scop
