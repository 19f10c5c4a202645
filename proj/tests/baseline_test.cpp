#include <doctest.h>

#include "fixtures.hpp"
#include "scop/baseline.hpp"

using namespace scop;
using namespace scop::testing;

namespace {

std::size_t index_of(const LinearSystem& sys, const std::string& name) {
  for (std::size_t i = 0; i < sys.names.size(); ++i)
    if (sys.names[i] == name) return i;
  FAIL("no value variable " << name);
  return 0;
}

bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

TEST_CASE("decomposition of the small example") {
  const auto g = small_example();
  const std::vector<ConstraintTerm> terms{{g, 1.0}};
  const LinearSystem sys = decompose(terms, 0.4);
  CHECK(sys.equations.size() == g->internal_count());
  for (const char* n : {"v(r)", "v(x)", "v(y_1)", "v(y_2)", "v(s)", "v(t)"}) CHECK_NOTHROW(index_of(sys, n));
  const std::string text = format_system(sys);
  CHECK(text.find(">= 0.4") != std::string::npos);
  CHECK(text.find("v(x)") != std::string::npos);
}

TEST_CASE("bounds propagation on the small example misses the forced value") {
  const auto g = small_example();
  const std::vector<ConstraintTerm> terms{{g, 1.0}};
  const LinearSystem sys = decompose(terms, 0.4);
  const BoundsResult r = bounds_propagate(sys, DomainState(g->vars()));
  REQUIRE(r.result.ok());
  CHECK(r.result.fixed.empty());
  CHECK_FALSE(r.hit_cap);

  const Interval root = r.initial[index_of(sys, "v(r)")];
  CHECK(near(root.lo, 0.0));
  CHECK(near(root.hi, 0.6));
  const Interval x = r.initial[index_of(sys, "v(x)")];
  CHECK(near(x.lo, 0.0));
  CHECK(near(x.hi, 0.6));
  const Interval y1 = r.initial[index_of(sys, "v(y_1)")];
  CHECK(near(y1.lo, 0.0));
  CHECK(near(y1.hi, 0.6));
  const Interval y2 = r.initial[index_of(sys, "v(y_2)")];
  CHECK(near(y2.lo, 0.3));
  CHECK(near(y2.hi, 0.6));

  // With the threshold: .9 v(x) + .1 v(y_1) >= .4 only tightens v(x).
  const Interval xf = r.intervals[index_of(sys, "v(x)")];
  CHECK(near(xf.lo, (0.4 - 0.1 * 0.6) / 0.9));
  CHECK(near(r.intervals[index_of(sys, "v(r)")].lo, 0.4));
  CHECK(near(r.intervals[index_of(sys, "v(y_2)")].lo, 0.3));
}

TEST_CASE("bounds propagation is sound") {
  // Anything it prunes must be unextendable, and failure means no strategy works.
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> frac(0.0, 1.1);
  for (int it = 0; it < 300; ++it) {
    auto [vars, terms] = random_terms(rng, 5, 5, 1 + it % 2, it % 3 == 0);
    const DomainState d = random_domains(rng, *vars, 0.7);
    double top = 0.0;
    for (const auto& t : terms) top += t.reward * optimistic_value(*t.obdd, d);
    const double theta = top * frac(rng);
    const auto r = bounds_propagate(decompose(terms, theta), d);
    const auto ref = extendable_values(terms, *vars, d, theta);
    if (!r.result.ok()) {
      REQUIRE_FALSE(ref.any);
      continue;
    }
    for (const Fix& f : r.result.fixed) {
      const auto ok = ref.values.at(f.var.index);
      REQUIRE((f.value ? ok.first : ok.second) == false);
    }
    REQUIRE(r.total.lo <= r.total.hi + 1e-9);
  }
}

TEST_CASE("bounds propagation fixes decisions when one branch is cut off") {
  // f = d AND s: with theta above zero, d must be true.
  auto vars = std::make_shared<VariableTable>();
  const VarId d = vars->add_decision("d");
  const VarId s = vars->add_stochastic("s", 0.5);
  const std::vector<Cube> cubes{Cube{{d, s}}};
  auto g = std::make_shared<const Obdd>(from_dnf(vars, cubes));
  const std::vector<ConstraintTerm> terms{{g, 1.0}};
  const auto r = bounds_propagate(decompose(terms, 0.25), DomainState(*vars));
  REQUIRE(r.result.ok());
  REQUIRE(r.result.fixed.size() == 1);
  CHECK(r.result.fixed[0] == Fix{d, true});
  CHECK_FALSE(bounds_propagate(decompose(terms, 0.75), DomainState(*vars)).result.ok());
}

TEST_CASE("multi-term systems prefix value names per term") {
  const auto built = build_problem(network_example(false));
  const LinearSystem sys = decompose(built.query_terms, 1.0);
  CHECK(sys.roots.size() == 2);
  CHECK(sys.names.front().rfind("v1", 0) == 0);
  CHECK(sys.names.back().rfind("v2", 0) == 0);
}
