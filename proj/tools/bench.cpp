#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "scop/baseline.hpp"

namespace scop::bench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point since) {
  return std::chrono::duration<double, std::micro>(Clock::now() - since).count();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Job {
  std::string name;
  std::uint64_t seed;
  std::function<std::vector<ConstraintTerm>()> make_terms;
};

}  // namespace

ProblemSpec random_network(std::uint64_t seed, std::size_t edges) {
  std::mt19937_64 rng(seed);
  edges = std::max<std::size_t>(edges, 1);
  std::size_t k = std::max<std::size_t>(3, (2 * edges + 2) / 3);
  while (k * (k - 1) / 2 < edges) ++k;
  k = std::min(k, edges + 1);

  ProblemSpec spec;
  for (std::size_t i = 0; i < k; ++i) spec.network.nodes.push_back("n" + std::to_string(i));
  std::uniform_real_distribution<double> prob(0.05, 0.95);
  auto draw = [&] { return std::round(prob(rng) * 100.0) / 100.0; };
  std::set<std::pair<std::size_t, std::size_t>> used;
  auto add = [&](std::size_t a, std::size_t b) {
    used.emplace(std::min(a, b), std::max(a, b));
    spec.network.edges.push_back(NetworkEdge{spec.network.nodes[a], spec.network.nodes[b], draw()});
  };
  for (std::size_t i = 1; i < k && spec.network.edges.size() < edges; ++i)
    add(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng), i);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  while (spec.network.edges.size() < edges) {
    const std::size_t a = pick(rng), b = pick(rng);
    if (a == b || used.contains({std::min(a, b), std::max(a, b)})) continue;
    add(a, b);
  }

  std::uniform_int_distribution<std::size_t> target(1, k - 1);
  const std::size_t t1 = target(rng);
  std::size_t t2 = target(rng);
  if (k > 2)
    while (t2 == t1) t2 = target(rng);
  spec.queries.push_back(Query{spec.network.nodes[0], spec.network.nodes[t1], 1.0});
  if (t2 != t1) spec.queries.push_back(Query{spec.network.nodes[0], spec.network.nodes[t2], 1.0});
  spec.mode = ProblemMode::Maximize;
  return spec;
}

std::vector<Row> run_instance(const std::string& name, const std::vector<ConstraintTerm>& terms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const VariableTable& vars = terms.front().obdd->vars();
  DomainState domains(vars);

  double fmax = 0.0;
  for (const auto& t : terms) fmax += t.reward * evaluate(*t.obdd, domains);
  const double theta = fmax * std::uniform_real_distribution<double>(0.5, 0.95)(rng);

  apply_fixes(dc_propagate(terms, domains, theta), domains);
  const DomainState before = domains;
  const auto free = domains.free_vars();
  std::optional<VarId> flipped;
  if (!free.empty()) {
    flipped = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    domains.fix(*flipped, false);
  }

  std::size_t nodes = 0;
  for (const auto& t : terms) nodes += t.obdd->size();
  auto row = [&](const char* prop, const PropagationResult& r, double us) {
    return Row{name, prop, vars.decision_count(), nodes, r.ok() ? r.fixed.size() : 0, r.visits, us};
  };

  std::vector<Row> rows;
  auto t0 = Clock::now();
  const auto naive = naive_propagate(terms, domains, theta);
  rows.push_back(row("naive", naive, elapsed_us(t0)));

  t0 = Clock::now();
  const auto dc = dc_propagate(terms, domains, theta);
  rows.push_back(row("derivative", dc, elapsed_us(t0)));

  std::vector<PropagationScratch> scratches;
  for (const auto& t : terms) scratches.emplace_back(t.obdd, before);
  t0 = Clock::now();
  std::uint64_t inc_visits = 0;
  if (flipped)
    for (auto& s : scratches) inc_visits += s.incremental_fix(*flipped, false);
  std::vector<ScratchTerm> st;
  for (std::size_t i = 0; i < terms.size(); ++i) st.push_back(ScratchTerm{&scratches[i], terms[i].reward});
  auto inc = dc_check(st, theta);
  inc.visits += inc_visits;
  rows.push_back(row("incremental", inc, elapsed_us(t0)));

  t0 = Clock::now();
  const LinearSystem sys = decompose(terms, theta);
  const auto bounds = bounds_propagate(sys, domains);
  rows.push_back(row("baseline", bounds.result, elapsed_us(t0)));
  return rows;
}

void run(const Options& opts, std::ostream& out, std::ostream& err) {
  std::vector<Job> jobs;
  if (!opts.instance_dir.empty()) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(opts.instance_dir))
      if (entry.path().extension() == ".scop") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (std::size_t i = 0; i < files.size(); ++i) {
      const auto path = files[i];
      jobs.push_back(Job{path.stem().string(), opts.seed + i, [path] {
                           return build_problem(parse_problem(read_file(path))).query_terms;
                         }});
    }
  } else {
    for (std::size_t size : opts.sizes)
      for (std::size_t k = 0; k < opts.count; ++k) {
        const std::uint64_t seed = opts.seed * 1000003ULL + size * 1009ULL + k;
        jobs.push_back(Job{"rand-n" + std::to_string(size) + "-" + std::to_string(k), seed, [seed, size] {
                             return build_problem(random_network(seed, size)).query_terms;
                           }});
      }
  }

  std::vector<std::vector<Row>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next == jobs.size()) return;
        i = next++;
      }
      try {
        const auto terms = jobs[i].make_terms();
        results[i] = run_instance(jobs[i].name, terms, jobs[i].seed);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(opts.jobs, 1, std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  out << "instance,propagator,decision_vars,nodes,fixed,visits";
  if (opts.timing) out << ",wall_us";
  out << '\n';
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      err << "instance " << jobs[i].name << ": " << errors[i] << '\n';
      continue;
    }
    for (const auto& r : results[i]) {
      out << r.instance << ',' << r.propagator << ',' << r.decision_vars << ',' << r.nodes << ',' << r.fixed << ','
          << r.visits;
      if (opts.timing) out << ',' << format_real(std::round(r.wall_us * 1000.0) / 1000.0);
      out << '\n';
    }
  }
}

}  // namespace scop::bench
