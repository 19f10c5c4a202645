// Acceptance suite: one PASS/FAIL line per criterion. Criteria listed in
// kUnattainable fail on exact arithmetic (see README); any other failure makes
// the exit status nonzero.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "scop/baseline.hpp"

using namespace scop;
using namespace scop::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// The strategy table lists .3 for x=1, y=0, but the drawn diagram gives .9 * .3.
const std::set<int> kUnattainable = {2};

std::set<int> failed;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << " | " << detail << std::endl;
  if (!pass) failed.insert(id);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string fmt(double x) { return format_real(x); }

std::set<std::pair<std::uint32_t, bool>> fix_set(const PropagationResult& r) {
  std::set<std::pair<std::uint32_t, bool>> out;
  for (const Fix& f : r.fixed) out.emplace(f.var.index, f.value);
  return out;
}

std::size_t index_of(const LinearSystem& sys, const std::string& name) {
  for (std::size_t i = 0; i < sys.names.size(); ++i)
    if (sys.names[i] == name) return i;
  throw std::runtime_error("missing value variable " + name);
}

// ---------------------------------------------------------------------------

void small_example_propagation() {
  const auto g = small_example();
  const std::vector<ConstraintTerm> terms{{g, 1.0}};
  const DomainState d(g->vars());
  const VarId x = g->vars().at("x"), y = g->vars().at("y");

  const auto t0 = Clock::now();
  const auto dc = dc_propagate(terms, d, 0.4);
  const LinearSystem sys = decompose(terms, 0.4);
  const auto bl = bounds_propagate(sys, d);
  const double elapsed = seconds_since(t0);

  const bool dc_ok = dc.ok() && dc.fixed.size() == 1 && dc.fixed[0] == Fix{y, true};
  const bool x_free = std::none_of(dc.fixed.begin(), dc.fixed.end(), [&](const Fix& f) { return f.var == x; });
  const Interval vy2 = bl.initial[index_of(sys, "v(y_2)")];
  const Interval vx = bl.initial[index_of(sys, "v(x)")];
  const bool bl_ok = bl.result.ok() && bl.result.fixed.empty();
  const bool iv_ok = near(vy2.lo, 0.3, 1e-12) && near(vy2.hi, 0.6, 1e-12) && near(vx.lo, 0.0, 1e-12) &&
                     near(vx.hi, 0.6, 1e-12);
  std::ostringstream os;
  os << "dc fixes y=1: " << dc_ok << ", x free: " << x_free << ", baseline fixes nothing: " << bl_ok
     << ", v(y_2) in [" << fmt(vy2.lo) << "," << fmt(vy2.hi) << "], v(x) in [" << fmt(vx.lo) << "," << fmt(vx.hi)
     << "], " << fmt(elapsed * 1e3) << " ms";
  report(1, "small example: dc forces y, bounds propagation does not", dc_ok && x_free && bl_ok && iv_ok &&
                                                                            elapsed < 1e-3,
         os.str());
}

void strategy_table() {
  const auto g = small_example();
  const VarId x = g->vars().at("x"), y = g->vars().at("y");
  const double expected[4] = {0.0, 0.3, 0.6, 0.6};
  const bool xs[4] = {false, true, true, false};
  const bool ys[4] = {false, false, true, true};
  bool pass = true;
  std::ostringstream os;
  for (int k = 0; k < 4; ++k) {
    DomainState d(g->vars());
    d.fix(x, xs[k]);
    d.fix(y, ys[k]);
    const double e = evaluate(*g, d);
    pass = pass && near(e, expected[k], 1e-12);
    os << "x=" << xs[k] << ",y=" << ys[k] << ": " << fmt(e) << " (want " << fmt(expected[k]) << ")  ";
  }
  report(2, "strategy probabilities of the small example", pass, os.str());
}

void path_weight_example() {
  const auto built = build_problem(network_example(true));
  const Obdd& g = *built.query_terms[0].obdd;
  DomainState d(g.vars());
  d.fix(g.vars().at("d_cd"), true);
  d.fix(g.vars().at("d_ac"), true);
  const auto pi = compute_path_weights(g, d);
  const auto tad = g.nodes_of(g.vars().at("t_ad"));
  const bool one = tad.size() == 1;
  const double w = one ? pi[tad[0]] : -1.0;
  report(3, "path weight of the t_ad node", one && near(w, 0.06, 1e-12),
         "pi = " + fmt(w) + " over " + std::to_string(g.internal_count()) + " internal nodes");
}

void single_model() {
  const auto built = build_problem(network_example(false));
  const Obdd& ac = *built.query_terms[0].obdd;
  const VariableTable& vars = ac.vars();
  std::vector<std::optional<bool>> m(vars.size());
  for (const auto& v : vars.all()) m[v.id.index] = v.is_decision();
  m[vars.at("t_ac").index] = true;
  const double p = model_probability(ac, m);
  const double want = 0.4 * 0.2 * 0.9 * 0.5 * 0.3;
  report(4, "probability of one model of the a->c query", near(p, want, 1e-12),
         "got " + fmt(p) + ", product .4*.2*.9*.5*.3 = " + fmt(want));
}

// Random instances shared by criteria 5 to 7.
struct Instance {
  RandomTerms rt;
  DomainState domains;
  double theta;
};

Instance make_instance(std::mt19937_64& rng, std::size_t max_dec, std::size_t max_stoch) {
  std::uniform_int_distribution<std::size_t> nd(1, max_dec), ns(0, max_stoch), nt(1, 3);
  std::uniform_real_distribution<double> pf(0.3, 1.0), frac(0.0, 1.1);
  std::bernoulli_distribution coin(0.5);
  Instance in{random_terms(rng, nd(rng), ns(rng), nt(rng), coin(rng)), {}, 0.0};
  in.domains = random_domains(rng, *in.rt.vars, pf(rng));
  double top = 0.0;
  for (const auto& t : in.rt.terms) top += t.reward * optimistic_value(*t.obdd, in.domains);
  in.theta = top * frac(rng);
  return in;
}

std::vector<Instance> derivative_instances, consistency_instances;

void derivative_property() {
  std::mt19937_64 rng(1001);
  const auto t0 = Clock::now();
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Instance in = make_instance(rng, 10, 10);
    for (const auto& t : in.rt.terms) {
      const Obdd& g = *t.obdd;
      const auto pi = compute_path_weights(g, in.domains);
      const auto v = compute_values(g, in.domains);
      const auto delta = compute_derivatives(g, pi, v, in.domains);
      const double f = optimistic_value(g, in.domains);
      for (VarId x : in.domains.free_vars()) {
        DomainState off = in.domains;
        off.fix(x, false);
        const double err = std::abs(delta[x.index] - (f - optimistic_value(g, off)));
        worst = std::max(worst, err);
        ++checked;
        if (err > 1e-12) ++bad;
      }
    }
    derivative_instances.push_back(std::move(in));
  }
  const double elapsed = seconds_since(t0);
  report(5, "derivatives equal finite differences", bad == 0 && elapsed < 30.0,
         std::to_string(derivative_instances.size()) + " diagrams, " + std::to_string(checked) +
             " derivatives, max error " + fmt(worst) + ", " + fmt(elapsed) + " s");
}

void consistency_oracle() {
  std::mt19937_64 rng(2002);
  std::size_t mismatches = 0, infeasible = 0, fixes = 0;
  for (int it = 0; it < 500; ++it) {
    Instance in = make_instance(rng, 10, 8);
    const auto r = dc_propagate(in.rt.terms, in.domains, in.theta);
    const auto ref = extendable_values(in.rt.terms, *in.rt.vars, in.domains, in.theta);
    bool match = r.ok() == ref.any;
    if (match && r.ok()) {
      const auto fx = fix_set(r);
      fixes += fx.size();
      for (const auto& [idx, ok] : ref.values) {
        const bool false_survives = fx.count({idx, true}) == 0;
        const bool true_survives = fx.count({idx, false}) == 0;
        match = match && false_survives == ok.first && true_survives == ok.second;
      }
    }
    infeasible += !r.ok();
    mismatches += !match;
    consistency_instances.push_back(std::move(in));
  }
  report(6, "surviving values are exactly the extendable ones", mismatches == 0,
         std::to_string(consistency_instances.size()) + " instances (" + std::to_string(infeasible) + " infeasible, " +
             std::to_string(fixes) + " values removed), " + std::to_string(mismatches) + " mismatches");
}

void propagator_equivalence() {
  std::size_t compared = 0, disagreements = 0;
  for (const auto* set : {&derivative_instances, &consistency_instances})
    for (const auto& in : *set) {
      const auto a = dc_propagate(in.rt.terms, in.domains, in.theta);
      const auto b = naive_propagate(in.rt.terms, in.domains, in.theta);
      ++compared;
      if (a.ok() != b.ok() || fix_set(a) != fix_set(b)) ++disagreements;
    }

  std::mt19937_64 rng(3003);
  std::bernoulli_distribution coin(0.5);
  std::size_t steps = 0;
  double worst = 0.0;
  bool undo_exact = true;
  for (int it = 0; it < 300; ++it) {
    Instance in = make_instance(rng, 10, 10);
    for (const auto& t : in.rt.terms) {
      PropagationScratch s(t.obdd, in.domains);
      const auto pi0 = s.path_weights();
      const auto v0 = s.values();
      const std::size_t m0 = s.mark();
      auto order = in.domains.free_vars();
      std::shuffle(order.begin(), order.end(), rng);
      for (VarId x : order) {
        s.incremental_fix(x, coin(rng));
        const auto pi = compute_path_weights(*t.obdd, s.domains());
        const auto v = compute_values(*t.obdd, s.domains());
        for (std::size_t i = 0; i < pi.size(); ++i)
          worst = std::max({worst, std::abs(pi[i] - s.path_weights()[i]), std::abs(v[i] - s.values()[i])});
        ++steps;
      }
      s.undo(m0);
      undo_exact = undo_exact && s.path_weights() == pi0 && s.values() == v0 && s.domains() == in.domains;
    }
  }
  std::ostringstream os;
  os << compared << " instances, " << disagreements << " naive/dc disagreements; " << steps
     << " incremental fixes, max deviation " << fmt(worst) << ", undo exact: " << undo_exact;
  report(7, "naive and derivative propagators agree; incremental state is exact",
         disagreements == 0 && worst <= 1e-12 && undo_exact, os.str());
}

void visit_counts() {
  std::mt19937_64 rng(4004);
  const std::size_t sizes[3] = {5, 10, 20};
  double ratio[3] = {0, 0, 0}, mean_m[3] = {0, 0, 0};
  bool linear = true, quadratic = true;
  const int per_size = 30;
  for (int k = 0; k < 3; ++k) {
    const std::size_t n = sizes[k];
    int kept = 0;
    while (kept < per_size) {
      auto vars = random_table(rng, n, 8);
      ObddBuilder b(vars);
      const auto cubes = random_cubes(rng, *vars, 3 + kept % 4, 5);
      auto g = std::make_shared<const Obdd>(b.extract(b.disjunction(cubes)));
      if (g->internal_count() < 25 || g->internal_count() > 60) continue;
      ++kept;
      const std::vector<ConstraintTerm> terms{{g, 1.0}};
      const DomainState d(*vars);
      const auto dc = dc_propagate(terms, d, 0.0);
      const auto naive = naive_propagate(terms, d, 0.0);
      const std::size_t m = g->size();
      linear = linear && dc.visits <= 2 * m + n;
      quadratic = quadratic && naive.visits >= n * g->internal_count() && naive.visits <= (n + 1) * m + n;
      ratio[k] += double(naive.visits) / double(dc.visits) / per_size;
      mean_m[k] += double(m) / per_size;
    }
  }
  const bool increasing = ratio[0] < ratio[1] && ratio[1] < ratio[2];
  std::ostringstream os;
  for (int k = 0; k < 3; ++k)
    os << "n=" << sizes[k] << ": mean m " << fmt(std::round(mean_m[k] * 10) / 10) << ", naive/dc "
       << fmt(std::round(ratio[k] * 100) / 100) << "; ";
  os << "dc <= 2m+n: " << linear << ", naive ~ n*m: " << quadratic;
  report(8, "visit counts: dc linear, naive grows with n", linear && quadratic && increasing, os.str());
}

void network_optimum() {
  const ProblemSpec spec = network_example(false);
  const auto t0 = Clock::now();
  const auto built = build_problem(spec);
  const auto r = solve_opt(built.problem);
  const double elapsed = seconds_since(t0);

  // Independent oracle: every edge subset, reachability by graph search.
  const std::size_t m = spec.network.edges.size();
  double best = -1.0;
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    if (std::popcount(mask) > static_cast<int>(*spec.cardinality)) continue;
    std::vector<bool> sel(m);
    for (std::size_t k = 0; k < m; ++k) sel[k] = (mask >> k) & 1U;
    double total = 0.0;
    for (const auto& q : spec.queries) total += q.reward * reachability(spec.network, q, sel);
    best = std::max(best, total);
  }
  const bool sat = r.status == SolveStatus::Sat && r.strategy;
  const bool feasible = sat && satisfies(built.problem, *r.strategy);
  std::ostringstream os;
  os << "solver " << fmt(r.value) << ", enumeration " << fmt(best) << ", feasible: " << feasible << ", "
     << fmt(elapsed * 1e3) << " ms";
  report(9, "network example optimum", sat && feasible && near(r.value, best, 1e-9) && elapsed < 1.0, os.str());
}

void solver_completeness() {
  std::mt19937_64 rng(5005);
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, unsat = 0, with_card = 0, opt = 0;
  const int count = 250;
  for (int it = 0; it < count; ++it) {
    auto [vars, terms] = random_terms(rng, 1 + it % 10, 1 + it % 7, 3, it % 2 == 1);
    Problem p;
    p.vars = vars;
    const DomainState all(*vars);
    std::uniform_real_distribution<double> frac(0.1, 1.1);
    if (it % 4 != 3) {
      const std::vector<ConstraintTerm> c{terms[0]};
      p.constraints.push_back({c, c[0].reward * optimistic_value(*c[0].obdd, all) * frac(rng)});
    }
    if (it % 4 >= 2) p.objective = Objective{{terms[1], terms[2]}};
    if (it % 3 != 0) {
      p.cardinality = std::uniform_int_distribution<std::size_t>(0, all.decisions().size())(rng);
      ++with_card;
    }
    const auto brute = brute_force(p);
    const auto r = p.objective ? solve_opt(p) : solve_sat(p);
    bool match = (r.status == SolveStatus::Sat) == brute.sat;
    if (match && brute.sat) {
      match = r.strategy && satisfies(p, *r.strategy);
      if (p.objective) match = match && near(r.value, brute.best, 1e-9);
    }
    unsat += !brute.sat;
    opt += p.objective.has_value();
    mismatches += !match;
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << count << " problems (" << unsat << " unsat, " << opt << " optimization, " << with_card
     << " with cardinality), " << mismatches << " mismatches, " << fmt(std::round(elapsed * 1000) / 1000) << " s";
  report(10, "solver verdicts and optima match enumeration", mismatches == 0 && elapsed < 60.0, os.str());
}

}  // namespace

int main() {
  const std::pair<int, void (*)()> criteria[] = {
      {1, small_example_propagation}, {2, strategy_table},       {3, path_weight_example},
      {4, single_model},              {5, derivative_property},  {6, consistency_oracle},
      {7, propagator_equivalence},    {8, visit_counts},         {9, network_optimum},
      {10, solver_completeness},
  };
  for (const auto& [id, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "raised an exception", false, e.what());
    }
  }
  std::size_t unexpected = 0;
  for (int id : failed) unexpected += !kUnattainable.contains(id);
  std::cout << 10 - failed.size() << "/10 criteria passed";
  if (!failed.empty()) {
    std::cout << "; failed:";
    for (int id : failed) std::cout << ' ' << id << (kUnattainable.contains(id) ? " (known unattainable)" : "");
  }
  std::cout << std::endl;
  return unexpected == 0 ? 0 : 1;
}
