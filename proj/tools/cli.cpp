#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bench.hpp"
#include "scop/baseline.hpp"
#include "scop/errors.hpp"
#include "scop/model_io.hpp"
#include "scop/obdd.hpp"
#include "scop/solver.hpp"

namespace scop::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<std::string> read_order_file(const std::string& path) {
  std::vector<std::string> names;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok)
      if (tok != "order") names.push_back(tok);
  }
  return names;
}

ProblemSpec load_spec(const std::string& path, const std::string& order_file) {
  ProblemSpec spec = parse_problem(read_file(path));
  if (!order_file.empty()) {
    spec.order = read_order_file(order_file);
    network_variables(spec);  // validates the names
  }
  return spec;
}

void check_theta(double theta, const std::vector<ConstraintTerm>& terms) {
  double sum = 0.0;
  for (const auto& t : terms) sum += t.reward;
  if (!(theta >= 0.0 && theta <= sum))
    throw UsageError("theta " + format_real(theta) + " outside [0, " + format_real(sum) + "]");
}

bool is_obdd_file(const std::string& path) { return fs::path(path).extension() == ".obdd"; }

std::string strategy_text(const VariableTable& vars, const Strategy& s) {
  std::string out;
  for (VarId d : vars.decisions()) {
    if (!out.empty()) out += ' ';
    out += vars[d].name + "=" + (s[d] ? "1" : "0");
  }
  return out;
}

// ---------------------------------------------------------------------------

struct CompileArgs {
  std::string input;
  std::string order_file;
  std::string out_dir;
  bool dot = false;
};

int cmd_compile(const CompileArgs& a, std::ostream& out) {
  const ProblemSpec spec = load_spec(a.input, a.order_file);
  const BuiltProblem built = build_problem(spec);
  const std::string stem = fs::path(a.input).stem().string();
  for (std::size_t k = 0; k < spec.queries.size(); ++k) {
    const Query& q = spec.queries[k];
    const Obdd& g = *built.query_terms[k].obdd;
    const std::string label = q.source + "->" + q.target;
    if (a.out_dir.empty()) {
      out << "# query " << label << ": " << g.internal_count() << " internal nodes\n";
      out << (a.dot ? to_dot(g) : dump_obdd(g));
    } else {
      const fs::path base = fs::path(a.out_dir) / (stem + "_" + q.source + "_" + q.target);
      write_file(base.string() + ".obdd", dump_obdd(g));
      if (a.dot) write_file(base.string() + ".dot", to_dot(g));
      out << "query " << label << ": " << g.internal_count() << " internal nodes -> " << base.string() << ".obdd\n";
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PropagateArgs {
  std::vector<std::string> inputs;
  double theta = 0.0;
  std::vector<std::string> fixes;
  std::vector<double> rewards;
  bool json = false;
};

int cmd_propagate(const PropagateArgs& a, std::ostream& out) {
  std::vector<ConstraintTerm> terms;
  std::shared_ptr<const VariableTable> vars;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    Obdd g = load_obdd(read_file(a.inputs[i]));
    if (vars && !(g.vars() == *vars)) throw UsageError("'" + a.inputs[i] + "' declares a different variable table");
    if (!vars) vars = g.vars_ptr();
    const double reward = a.rewards.empty() ? 1.0 : a.rewards.at(i);
    terms.push_back(ConstraintTerm{std::make_shared<const Obdd>(std::move(g)), reward});
  }
  if (!a.rewards.empty() && a.rewards.size() != a.inputs.size())
    throw UsageError("--reward must be given once per diagram");

  check_theta(a.theta, terms);

  DomainState domains(*vars);
  for (const auto& f : a.fixes) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw UsageError("--fix expects name=0|1, got '" + f + "'");
    const std::string name = f.substr(0, eq);
    const std::string val = f.substr(eq + 1);
    const auto id = vars->find(name);
    if (!id || !(*vars)[*id].is_decision()) throw UsageError("--fix: '" + name + "' is not a decision variable");
    if (val != "0" && val != "1") throw UsageError("--fix expects name=0|1, got '" + f + "'");
    domains.fix(*id, val == "1");
  }

  const PropagationResult dc = dc_propagate(terms, domains, a.theta);
  const BoundsResult bl = bounds_propagate(decompose(terms, a.theta), domains);
  auto fixed_text = [&](const PropagationResult& r) {
    if (!r.ok()) return std::string("-");
    std::string s;
    for (const Fix& f : r.fixed) s += (s.empty() ? "" : " ") + (*vars)[f.var].name + "=" + (f.value ? "1" : "0");
    return s.empty() ? std::string("-") : s;
  };

  if (a.json) {
    auto side = [&](const PropagationResult& r) {
      json fixed = json::object();
      if (r.ok())
        for (const Fix& f : r.fixed) fixed[(*vars)[f.var].name] = f.value ? 1 : 0;
      return json{{"status", r.ok() ? "ok" : "failed"}, {"fixed", fixed}, {"visits", r.visits}};
    };
    json deltas = json::object();
    for (const auto& d : dc.deltas) deltas[(*vars)[d.var].name] = d.delta;
    json doc{{"F", dc.bound}, {"theta", a.theta}, {"deltas", deltas}, {"dc", side(dc)}, {"baseline", side(bl.result)}};
    out << doc.dump(2) << '\n';
  } else {
    out << "F = " << format_real(dc.bound) << "\n";
    out << "theta = " << format_real(a.theta) << "\n";
    if (!dc.deltas.empty()) {
      out << "variable  delta\n";
      for (const auto& d : dc.deltas) out << std::left << std::setw(10) << (*vars)[d.var].name << format_real(d.delta) << '\n';
    }
    out << "propagator  status  fixed\n";
    out << "dc          " << std::setw(8) << (dc.ok() ? "ok" : "failed") << fixed_text(dc) << '\n';
    out << "baseline    " << std::setw(8) << (bl.result.ok() ? "ok" : "failed") << fixed_text(bl.result) << '\n';
  }
  return dc.ok() ? kExitOk : kExitUnsat;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string input;
  std::string order_file;
  std::optional<double> theta;
  std::optional<std::size_t> cardinality;
  double delta = 1e-9;
  bool json = false;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  Problem problem;
  if (is_obdd_file(a.input)) {
    auto g = std::make_shared<const Obdd>(load_obdd(read_file(a.input)));
    problem.vars = g->vars_ptr();
    std::vector<ConstraintTerm> terms{ConstraintTerm{g, 1.0}};
    if (a.theta)
      problem.constraints.push_back(StochasticConstraint{terms, *a.theta});
    else
      problem.objective = Objective{terms};
  } else {
    ProblemSpec spec = load_spec(a.input, a.order_file);
    if (a.theta) {
      spec.mode = ProblemMode::Constraint;
      spec.theta = *a.theta;
    }
    problem = build_problem(spec).problem;
  }
  if (a.cardinality) problem.cardinality = a.cardinality;
  for (const auto& c : problem.constraints) check_theta(c.theta, c.terms);

  const SolveResult res = problem.objective ? solve_opt(problem, a.delta) : solve_sat(problem);
  const bool sat = res.status == SolveStatus::Sat;
  const VariableTable& vars = *problem.vars;
  if (a.json) {
    json strategy = json::object();
    if (res.strategy)
      for (VarId d : vars.decisions()) strategy[vars[d].name] = (*res.strategy)[d] ? 1 : 0;
    json doc{{"status", sat ? "sat" : "unsat"},
             {"strategy", sat ? strategy : json(nullptr)},
             {"value", sat ? json(res.value) : json(nullptr)},
             {"stats",
              {{"nodes", res.stats.nodes},
               {"backtracks", res.stats.backtracks},
               {"propagator_calls", res.stats.propagator_calls},
               {"node_visits", res.stats.node_visits},
               {"wall_seconds", res.stats.wall_seconds}}}};
    out << doc.dump(2) << '\n';
  } else {
    out << "status: " << (sat ? "SAT" : "UNSAT") << '\n';
    if (res.strategy) out << "strategy: " << strategy_text(vars, *res.strategy) << '\n';
    if (sat && problem.objective) out << "value: " << format_real(res.value) << '\n';
    out << "stats: nodes=" << res.stats.nodes << " backtracks=" << res.stats.backtracks
        << " propagator_calls=" << res.stats.propagator_calls << " node_visits=" << res.stats.node_visits
        << " wall_ms=" << format_real(res.stats.wall_seconds * 1e3) << '\n';
  }
  return sat ? kExitOk : kExitUnsat;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic constraint optimization over ordered binary decision diagrams", "scop"};
  app.require_subcommand(1);

  CompileArgs compile;
  auto* c = app.add_subcommand("compile", "Compile each query of a problem file into an OBDD");
  c->add_option("problem", compile.input, "Problem file")->required();
  c->add_option("--order-file", compile.order_file, "File listing the variable order");
  c->add_option("-o,--out-dir", compile.out_dir, "Write one .obdd (and .dot) file per query here");
  c->add_flag("--dot", compile.dot, "Emit Graphviz instead of / in addition to the exchange format");

  PropagateArgs prop;
  auto* p = app.add_subcommand("propagate", "One-shot propagation on OBDD files: derivative vs baseline");
  p->add_option("obdd", prop.inputs, "OBDD exchange files (one per term)")->required();
  p->add_option("--theta", prop.theta, "Threshold")->required();
  p->add_option("--fix", prop.fixes, "Fixed decision, name=0|1 (repeatable)");
  p->add_option("--reward", prop.rewards, "Reward per diagram (default 1)");
  p->add_flag("--json", prop.json, "JSON output");

  SolveArgs solve;
  double theta_opt = 0.0;
  std::size_t card_opt = 0;
  auto* s = app.add_subcommand("solve", "Solve a problem file (or a single .obdd as a one-term problem)");
  s->add_option("problem", solve.input, "Problem file or .obdd file")->required();
  auto* theta_flag = s->add_option("--theta", theta_opt, "Run as a constraint problem with this threshold");
  s->add_option("--delta", solve.delta, "Threshold ramping step for optimization")->check(CLI::PositiveNumber);
  auto* card_flag = s->add_option("--cardinality", card_opt, "Override the cardinality bound");
  s->add_option("--order-file", solve.order_file, "File listing the variable order");
  s->add_flag("--json", solve.json, "JSON output");

  bench::Options bopts;
  auto* b = app.add_subcommand("bench", "Compare propagators on random or given instances (CSV)");
  b->add_option("instances", bopts.instance_dir, "Directory of .scop problem files");
  b->add_option("--seed", bopts.seed, "Random seed");
  b->add_option("--size", bopts.sizes, "Edge counts of generated networks (repeatable)");
  b->add_option("--count", bopts.count, "Generated instances per size");
  b->add_option("--jobs", bopts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  b->add_flag("--timing", bopts.timing, "Add a wall_us column (makes output run-dependent)");
  bool csv = true;
  b->add_flag("--csv", csv, "CSV output (the only format)");

  std::vector<std::string> argv_store{"scop"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*c) return cmd_compile(compile, out);
    if (*p) return cmd_propagate(prop, out);
    if (*s) {
      if (*theta_flag) solve.theta = theta_opt;
      if (*card_flag) solve.cardinality = card_opt;
      return cmd_solve(solve, out);
    }
    if (*b) {
      bench::run(bopts, out, err);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace scop::cli
