#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "oracles.hpp"

namespace scop::testing {

inline std::string read_data(const std::string& name) {
  std::ifstream in(data_path(name));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The five-variable example diagram with two decisions x and y.
inline std::shared_ptr<const Obdd> small_example() {
  return std::make_shared<const Obdd>(load_obdd(read_data("small.obdd")));
}

/// The four-node network, optionally under the order used for its drawn diagram.
inline ProblemSpec network_example(bool drawn_order) {
  ProblemSpec spec = parse_problem(read_data("network.scop"));
  if (drawn_order) spec.order = {"t_cd", "d_cd", "d_ac", "t_ac", "t_ad", "d_ad", "d_bd", "t_bd", "t_ab", "d_ab"};
  return spec;
}

}  // namespace scop::testing
