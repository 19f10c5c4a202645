#include "scop/solver.hpp"

#include <chrono>
#include <stdexcept>

namespace scop {

SearchStats& SearchStats::operator+=(const SearchStats& o) {
  nodes += o.nodes;
  backtracks += o.backtracks;
  propagator_calls += o.propagator_calls;
  node_visits += o.node_visits;
  wall_seconds += o.wall_seconds;
  return *this;
}

void Problem::validate() const {
  if (!vars) throw std::invalid_argument("problem has no variable table");
  if (constraints.empty() && !objective)
    throw std::invalid_argument("problem has neither constraints nor an objective");
  auto check_terms = [&](const std::vector<ConstraintTerm>& terms) {
    for (const auto& t : terms) {
      if (!t.obdd) throw std::invalid_argument("term without a diagram");
      if (!(t.reward >= 0.0)) throw std::invalid_argument("negative reward");
      if (t.obdd->vars_ptr() != vars && !(t.obdd->vars() == *vars))
        throw std::invalid_argument("term uses a different variable table");
    }
  };
  for (const auto& c : constraints) check_terms(c.terms);
  if (objective) check_terms(objective->terms);
}

PropagationResult cardinality_propagate(const DomainState& domains, std::size_t bound) {
  PropagationResult res;
  const std::size_t on = domains.count(Domain::TrueOnly);
  res.visits = domains.decisions().size();
  res.bound = static_cast<double>(on);
  if (on > bound) {
    res.status = PropagationStatus::Failed;
    return res;
  }
  if (on == bound)
    for (VarId d : domains.free_vars()) res.fixed.push_back(Fix{d, false});
  return res;
}

PropagationResult propagation_loop(const DomainState& domains, const Problem& problem) {
  DomainState cur = domains;
  PropagationResult out;
  bool changed = true;
  while (changed) {
    changed = false;
    auto absorb = [&](const PropagationResult& r) {
      out.visits += r.visits;
      if (!r.ok()) {
        out.status = PropagationStatus::Failed;
        out.fixed.clear();
        return false;
      }
      apply_fixes(r, cur);
      out.fixed.insert(out.fixed.end(), r.fixed.begin(), r.fixed.end());
      changed |= !r.fixed.empty();
      return true;
    };
    if (problem.cardinality && !absorb(cardinality_propagate(cur, *problem.cardinality))) return out;
    for (const auto& c : problem.constraints) {
      const auto r = dc_propagate(c.terms, cur, c.theta);
      if (!absorb(r)) return out;
      out.bound = r.bound;
    }
  }
  return out;
}

namespace {

// DFS with incremental propagation. Each constraint term owns a scratch that
// follows the search through incremental_fix and is rolled back on backtrack.
class Search {
 public:
  Search(const Problem& problem, const std::optional<StochasticConstraint>& extra)
      : problem_(problem), domains_(*problem.vars) {
    auto add = [&](const StochasticConstraint& c) {
      Entry e;
      e.theta = c.theta;
      for (const auto& t : c.terms) {
        e.scratches.emplace_back(t.obdd, domains_);
        e.rewards.push_back(t.reward);
      }
      entries_.push_back(std::move(e));
    };
    for (const auto& c : problem.constraints) add(c);
    if (extra) add(*extra);
  }

  std::optional<Strategy> run() {
    if (!dfs()) return std::nullopt;
    Strategy s;
    s.values.assign(problem_.vars->size(), false);
    for (VarId d : domains_.decisions()) s.values[d.index] = domains_.get(d) == Domain::TrueOnly;
    return s;
  }

  SearchStats stats;

 private:
  struct Entry {
    std::vector<PropagationScratch> scratches;
    std::vector<double> rewards;
    double theta = 0.0;
  };

  void fix(VarId var, bool value) {
    domains_.fix(var, value);
    assigned_.push_back(var);
    for (auto& e : entries_)
      for (auto& s : e.scratches) stats.node_visits += s.incremental_fix(var, value);
  }

  struct Mark {
    std::size_t assigned;
    std::vector<std::size_t> scratch_marks;
  };

  Mark mark() const {
    Mark m{assigned_.size(), {}};
    for (const auto& e : entries_)
      for (const auto& s : e.scratches) m.scratch_marks.push_back(s.mark());
    return m;
  }

  void undo(const Mark& m) {
    while (assigned_.size() > m.assigned) {
      domains_.set(assigned_.back(), Domain::Both);
      assigned_.pop_back();
    }
    std::size_t k = 0;
    for (auto& e : entries_)
      for (auto& s : e.scratches) s.undo(m.scratch_marks[k++]);
  }

  bool propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      if (problem_.cardinality) {
        ++stats.propagator_calls;
        const auto r = cardinality_propagate(domains_, *problem_.cardinality);
        stats.node_visits += r.visits;
        if (!r.ok()) return false;
        for (const Fix& f : r.fixed) fix(f.var, f.value);
        changed |= !r.fixed.empty();
      }
      for (auto& e : entries_) {
        if (e.scratches.empty()) {
          if (0.0 < e.theta - kThresholdSlack) return false;
          continue;
        }
        ++stats.propagator_calls;
        std::vector<ScratchTerm> terms;
        for (std::size_t i = 0; i < e.scratches.size(); ++i) terms.push_back(ScratchTerm{&e.scratches[i], e.rewards[i]});
        const auto r = dc_check(terms, e.theta);
        stats.node_visits += r.visits;
        if (!r.ok()) return false;
        for (const Fix& f : r.fixed) fix(f.var, f.value);
        changed |= !r.fixed.empty();
      }
    }
    return true;
  }

  bool dfs() {
    ++stats.nodes;
    if (!propagate()) return false;
    std::optional<VarId> branch;
    for (VarId d : domains_.decisions())
      if (domains_.is_free(d)) {
        branch = d;
        break;
      }
    if (!branch) return true;
    for (bool value : {true, false}) {
      const Mark m = mark();
      fix(*branch, value);
      if (dfs()) return true;
      ++stats.backtracks;
      undo(m);
    }
    return false;
  }

  const Problem& problem_;
  DomainState domains_;
  std::vector<Entry> entries_;
  std::vector<VarId> assigned_;
};

using Clock = std::chrono::steady_clock;

}  // namespace

double terms_value(const std::vector<ConstraintTerm>& terms, const Strategy& s) {
  double total = 0.0;
  for (const auto& t : terms) {
    const DomainState d = DomainState::from_strategy(t.obdd->vars(), s.values);
    total += t.reward * evaluate(*t.obdd, d);
  }
  return total;
}

bool satisfies(const Problem& problem, const Strategy& s) {
  if (problem.cardinality) {
    std::size_t on = 0;
    for (VarId d : problem.vars->decisions()) on += s[d] ? 1 : 0;
    if (on > *problem.cardinality) return false;
  }
  for (const auto& c : problem.constraints)
    if (terms_value(c.terms, s) < c.theta - kThresholdSlack) return false;
  return true;
}

SolveResult solve_sat(const Problem& problem) {
  problem.validate();
  const auto start = Clock::now();
  Search search(problem, std::nullopt);
  SolveResult out;
  out.strategy = search.run();
  out.status = out.strategy ? SolveStatus::Sat : SolveStatus::Unsat;
  if (out.strategy && problem.objective) out.value = terms_value(problem.objective->terms, *out.strategy);
  out.stats = search.stats;
  out.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

SolveResult solve_opt(const Problem& problem, double step) {
  problem.validate();
  if (!problem.objective) return solve_sat(problem);
  if (!(step > 0.0)) throw std::invalid_argument("solve_opt: step must be positive");
  const auto start = Clock::now();
  SolveResult best;
  StochasticConstraint ramp{problem.objective->terms, 0.0};
  while (true) {
    Search search(problem, ramp);
    auto found = search.run();
    best.stats += search.stats;
    if (!found) break;
    const double value = terms_value(problem.objective->terms, *found);
    if (best.strategy && value <= best.value) break;
    best.status = SolveStatus::Sat;
    best.value = value;
    best.strategy = std::move(found);
    // The slack is added back so the next round demands a real gain of `step`.
    ramp.theta = best.value + step + kThresholdSlack;
  }
  best.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return best;
}

}  // namespace scop
