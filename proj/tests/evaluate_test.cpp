#include <doctest.h>

#include "fixtures.hpp"

using namespace scop;
using namespace scop::testing;

namespace {

DomainState xy(const Obdd& g, bool x, bool y) {
  DomainState d(g.vars());
  d.fix(g.vars().at("x"), x);
  d.fix(g.vars().at("y"), y);
  return d;
}

}  // namespace

TEST_CASE("domain state basics") {
  const auto g = small_example();
  DomainState d(g->vars());
  CHECK(d.decisions().size() == 2);
  CHECK(d.free_vars().size() == 2);
  d.fix(g->vars().at("x"), false);
  CHECK(d.count(Domain::FalseOnly) == 1);
  CHECK_FALSE(d.all_fixed());
  CHECK_THROWS_AS(d.set(g->vars().at("r"), Domain::TrueOnly), std::invalid_argument);
}

TEST_CASE("strategy values of the small example") {
  const auto g = small_example();
  CHECK(evaluate(*g, xy(*g, false, false)) == 0.0);
  // r true (.9) reaches x; x true reaches y_2, y false reaches t (.3).
  CHECK(std::abs(evaluate(*g, xy(*g, true, false)) - 0.27) < 1e-12);
  CHECK(std::abs(evaluate(*g, xy(*g, true, true)) - 0.6) < 1e-12);
  CHECK(std::abs(evaluate(*g, xy(*g, false, true)) - 0.6) < 1e-12);
  CHECK(std::abs(evaluate(*g, DomainState(g->vars())) - 0.6) < 1e-12);
}

TEST_CASE("model probability of a single model") {
  const auto built = build_problem(network_example(true));
  const Obdd& ac = *built.query_terms[0].obdd;
  const VariableTable& vars = ac.vars();
  std::vector<std::optional<bool>> m(vars.size());
  for (const auto& v : vars.all()) m[v.id.index] = v.is_decision();
  m[vars.at("t_ac").index] = true;
  CHECK(std::abs(model_probability(ac, m) - 0.4 * 0.2 * 0.9 * 0.5 * 0.3) < 1e-12);

  m[vars.at("d_ac").index] = false;  // no longer a model
  CHECK(model_probability(ac, m) == 0.0);

  m[vars.at("t_ab").index] = std::nullopt;
  CHECK_THROWS_AS(model_probability(ac, m), std::invalid_argument);
}

TEST_CASE("summing model probabilities gives the evaluated value") {
  const auto built = build_problem(network_example(false));
  const Obdd& ac = *built.query_terms[0].obdd;
  const VariableTable& vars = ac.vars();
  std::vector<VarId> stoch;
  for (const auto& v : vars.all())
    if (!v.is_decision()) stoch.push_back(v.id);
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1U << stoch.size()); ++mask) {
    std::vector<std::optional<bool>> m(vars.size());
    for (const auto& v : vars.all()) m[v.id.index] = true;
    for (std::size_t i = 0; i < stoch.size(); ++i) m[stoch[i].index] = bool((mask >> i) & 1U);
    total += model_probability(ac, m);
  }
  CHECK(std::abs(total - evaluate(ac, DomainState(vars))) < 1e-12);
}

TEST_CASE("evaluate matches enumeration on random diagrams") {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 200; ++it) {
    auto [vars, terms] = random_terms(rng, 4, 6, 1, false);
    const Obdd& g = *terms[0].obdd;
    for (const auto& s : completions(*vars, DomainState(*vars))) {
      const double e = evaluate(g, DomainState::from_strategy(*vars, s));
      REQUIRE(std::abs(e - enumerated_value(g, s)) < 1e-12);
      REQUIRE(e >= 0.0);
      REQUIRE(e <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("evaluate is monotone and treats free as true") {
  std::mt19937_64 rng(22);
  for (int it = 0; it < 300; ++it) {
    auto [vars, terms] = random_terms(rng, 5, 5, 1, false);
    const Obdd& g = *terms[0].obdd;
    DomainState d = random_domains(rng, *vars, 0.5);
    for (VarId v : d.decisions()) {
      DomainState lo = d, hi = d, freed = d;
      lo.fix(v, false);
      hi.fix(v, true);
      freed.set(v, Domain::Both);
      REQUIRE(evaluate(g, hi) >= evaluate(g, lo));
      REQUIRE(evaluate(g, freed) == evaluate(g, hi));
    }
  }
}
