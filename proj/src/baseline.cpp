#include "scop/baseline.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace scop {

namespace {

constexpr double kEmptyTol = 1e-9;
constexpr double kChangeTol = 1e-12;

class BoundsEngine {
 public:
  BoundsEngine(const LinearSystem& sys, const DomainState& domains, std::vector<Interval> start)
      : sys_(sys), domains_(domains), iv_(std::move(start)) {
    cap_ = 100 * std::max<std::size_t>(1, sys_.equations.size() + 1);
  }

  // Runs sweeps to a fixpoint. Returns false on an empty interval or domain.
  bool run(bool with_threshold) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& eq : sys_.equations) {
        if (revisions_ >= cap_) {
          hit_cap_ = true;
          return true;
        }
        ++revisions_;
        const auto r = revise(eq);
        if (!r) return false;
        changed |= *r;
      }
      if (with_threshold) {
        ++revisions_;
        const auto r = revise_threshold();
        if (!r) return false;
        changed |= *r;
      }
    }
    return true;
  }

  Interval total() const {
    Interval t{0.0, 0.0};
    for (std::size_t k = 0; k < sys_.roots.size(); ++k) {
      const Interval r = get(sys_.roots[k]);
      t.lo += sys_.rewards[k] * r.lo;
      t.hi += sys_.rewards[k] * r.hi;
    }
    return t;
  }

  const std::vector<Interval>& intervals() const { return iv_; }
  const DomainState& domains() const { return domains_; }
  std::size_t revisions() const { return revisions_; }
  bool hit_cap() const { return hit_cap_; }

 private:
  Interval get(const ValueRef& r) const { return r.is_constant() ? Interval{r.constant, r.constant} : iv_[r.index]; }

  // nullopt = empty; otherwise whether the interval moved.
  std::optional<bool> narrow(const ValueRef& r, double lo, double hi) {
    if (r.is_constant()) {
      if (r.constant < lo - kEmptyTol || r.constant > hi + kEmptyTol) return std::nullopt;
      return false;
    }
    Interval& cur = iv_[r.index];
    double nlo = std::max(cur.lo, lo);
    double nhi = std::min(cur.hi, hi);
    if (nlo > nhi + kEmptyTol) return std::nullopt;
    if (nlo > nhi) nlo = nhi = 0.5 * (nlo + nhi);
    const bool moved = nlo > cur.lo + kChangeTol || nhi < cur.hi - kChangeTol;
    if (moved) cur = Interval{nlo, nhi};
    return moved;
  }

  static bool disjoint(const Interval& a, const Interval& b) {
    return a.lo > b.hi + kEmptyTol || b.lo > a.hi + kEmptyTol;
  }

  std::optional<bool> revise(const NodeEquation& eq) {
    const ValueRef self{static_cast<std::int32_t>(&eq - sys_.equations.data()), 0.0};
    bool moved = false;
    auto step = [&](std::optional<bool> r) {
      if (!r) return false;
      moved |= *r;
      return true;
    };

    if (!eq.decision) {
      const double w = eq.weight;
      const Interval lo = get(eq.lo);
      const Interval hi = get(eq.hi);
      if (!step(narrow(self, w * hi.lo + (1 - w) * lo.lo, w * hi.hi + (1 - w) * lo.hi))) return std::nullopt;
      const Interval v = get(self);
      if (w > 0.0) {
        const Interval l = get(eq.lo);
        if (!step(narrow(eq.hi, (v.lo - (1 - w) * l.hi) / w, (v.hi - (1 - w) * l.lo) / w))) return std::nullopt;
      }
      if (w < 1.0) {
        const Interval h = get(eq.hi);
        if (!step(narrow(eq.lo, (v.lo - w * h.hi) / (1 - w), (v.hi - w * h.lo) / (1 - w)))) return std::nullopt;
      }
      return moved;
    }

    Domain d = domains_.get(eq.var);
    const Interval v = get(self);
    if (d == Domain::Both) {
      const bool hi_out = disjoint(v, get(eq.hi));
      const bool lo_out = disjoint(v, get(eq.lo));
      if (hi_out && lo_out) return std::nullopt;
      if (hi_out || lo_out) {
        d = hi_out ? Domain::FalseOnly : Domain::TrueOnly;
        domains_.set(eq.var, d);
        moved = true;
      }
    }
    switch (d) {
      case Domain::TrueOnly:
        if (!step(narrow(self, get(eq.hi).lo, get(eq.hi).hi))) return std::nullopt;
        if (!step(narrow(eq.hi, get(self).lo, get(self).hi))) return std::nullopt;
        break;
      case Domain::FalseOnly:
        if (!step(narrow(self, get(eq.lo).lo, get(eq.lo).hi))) return std::nullopt;
        if (!step(narrow(eq.lo, get(self).lo, get(self).hi))) return std::nullopt;
        break;
      case Domain::Both: {
        const Interval a = get(eq.lo);
        const Interval b = get(eq.hi);
        if (!step(narrow(self, std::min(a.lo, b.lo), std::max(a.hi, b.hi)))) return std::nullopt;
        break;
      }
    }
    return moved;
  }

  std::optional<bool> revise_threshold() {
    const Interval t = total();
    if (t.hi < sys_.theta - kThresholdSlack) return std::nullopt;
    bool moved = false;
    for (std::size_t k = 0; k < sys_.roots.size(); ++k) {
      const double r = sys_.rewards[k];
      if (r <= 0.0) continue;
      const Interval cur = get(sys_.roots[k]);
      const double others = total().hi - r * cur.hi;
      const auto res = narrow(sys_.roots[k], (sys_.theta - others) / r, 1.0);
      if (!res) return std::nullopt;
      moved |= *res;
    }
    return moved;
  }

  const LinearSystem& sys_;
  DomainState domains_;
  std::vector<Interval> iv_;
  std::size_t revisions_ = 0;
  std::size_t cap_ = 0;
  bool hit_cap_ = false;
};

std::string coef(double x) { return format_real(x); }

std::string ref_text(const LinearSystem& s, const ValueRef& r) {
  return r.is_constant() ? format_real(r.constant) : s.names[r.index];
}

}  // namespace

LinearSystem decompose(std::span<const ConstraintTerm> terms, double theta) {
  LinearSystem sys;
  sys.theta = theta;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Obdd& g = *terms[k].obdd;
    if (!sys.vars) sys.vars = g.vars_ptr();
    if (terms[k].reward < 0.0) throw std::invalid_argument("decompose: negative reward");
    const auto base = static_cast<std::int32_t>(sys.equations.size());
    auto ref = [&](NodeId id) {
      if (id == kFalseNode) return ValueRef{-1, 0.0};
      if (id == kTrueNode) return ValueRef{-1, 1.0};
      return ValueRef{base + static_cast<std::int32_t>(id - 2), 0.0};
    };
    std::map<std::uint32_t, int> seen;
    for (NodeId i = 2; i < g.size(); ++i) {
      const Node& n = g.node(i);
      const VarInfo& info = g.vars()[n.var];
      sys.equations.push_back(NodeEquation{k, i, n.var, info.is_decision(), info.prob, ref(n.lo), ref(n.hi)});

      const std::size_t copies = g.nodes_of(n.var).size();
      std::string name = info.name;
      if (copies > 1) name += "_" + std::to_string(++seen[n.var.index]);
      std::string prefix = terms.size() > 1 ? "v" + std::to_string(k + 1) : "v";
      sys.names.push_back(prefix + "(" + name + ")");
    }
    sys.roots.push_back(ref(g.root()));
    sys.rewards.push_back(terms[k].reward);
  }
  return sys;
}

std::string format_system(const LinearSystem& s) {
  std::ostringstream os;
  for (std::size_t k = 0; k < s.roots.size(); ++k) {
    if (k) os << " + ";
    if (s.rewards[k] != 1.0) os << coef(s.rewards[k]) << ' ';
    os << ref_text(s, s.roots[k]);
  }
  if (s.roots.empty()) os << '0';
  os << " >= " << format_real(s.theta) << '\n';
  for (std::size_t i = 0; i < s.equations.size(); ++i) {
    const auto& eq = s.equations[i];
    os << s.names[i] << " = ";
    if (eq.decision) {
      const std::string& d = s.vars->all()[eq.var.index].name;
      os << "(1-" << d << ") " << ref_text(s, eq.lo) << " + " << d << ' ' << ref_text(s, eq.hi);
    } else {
      os << coef(1.0 - eq.weight) << ' ' << ref_text(s, eq.lo) << " + " << coef(eq.weight) << ' '
         << ref_text(s, eq.hi);
    }
    os << '\n';
  }
  return os.str();
}

BoundsResult bounds_propagate(const LinearSystem& system, const DomainState& domains,
                              const std::optional<std::vector<Interval>>& start) {
  std::vector<Interval> init = start.value_or(std::vector<Interval>(system.equations.size(), Interval{0.0, 1.0}));
  if (init.size() != system.equations.size()) throw std::invalid_argument("bounds_propagate: start size mismatch");

  BoundsResult out;
  BoundsEngine engine(system, domains, std::move(init));
  auto fail = [&] {
    out.result.status = PropagationStatus::Failed;
    out.intervals = engine.intervals();
    out.total = engine.total();
    out.revisions = engine.revisions();
    out.hit_cap = engine.hit_cap();
    out.result.bound = out.total.hi;
    out.result.visits = out.revisions;
    return out;
  };
  if (!engine.run(false)) {
    out.initial = engine.intervals();
    return fail();
  }
  out.initial = engine.intervals();
  if (!engine.run(true)) return fail();

  out.intervals = engine.intervals();
  out.total = engine.total();
  out.revisions = engine.revisions();
  out.hit_cap = engine.hit_cap();
  out.result.bound = out.total.hi;
  out.result.visits = out.revisions;
  for (VarId d : domains.free_vars()) {
    const Domain now = engine.domains().get(d);
    if (now != Domain::Both) out.result.fixed.push_back(Fix{d, now == Domain::TrueOnly});
  }
  return out;
}

}  // namespace scop
