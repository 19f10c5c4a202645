#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "scop/model_io.hpp"
#include "scop/propagate.hpp"

namespace scop::bench {

/// Random connected network with `edges` undirected edges, probabilities
/// uniform in [0.05, 0.95] (two decimals), and two queries from the first
/// node, in maximize mode.
ProblemSpec random_network(std::uint64_t seed, std::size_t edges);

struct Row {
  std::string instance;
  std::string propagator;  // naive | derivative | incremental | baseline
  std::size_t decision_vars = 0;
  std::size_t nodes = 0;  // diagram nodes over all terms, terminals included
  std::size_t fixed = 0;
  std::uint64_t visits = 0;
  double wall_us = 0.0;
};

/// One propagation scenario over the given terms: pick theta in
/// [0.5, 0.95] of the optimistic maximum, propagate, fix one surviving free
/// variable to false, then run all four propagators on the resulting state.
std::vector<Row> run_instance(const std::string& name, const std::vector<ConstraintTerm>& terms, std::uint64_t seed);

struct Options {
  std::uint64_t seed = 1;
  std::vector<std::size_t> sizes{5, 10, 20};
  std::size_t count = 3;
  std::size_t jobs = 1;
  bool timing = false;
  std::string instance_dir;  // when set, *.scop files replace generated instances
};

/// Writes the CSV table to `out`; per-instance failures go to `err`.
void run(const Options& opts, std::ostream& out, std::ostream& err);

}  // namespace scop::bench
