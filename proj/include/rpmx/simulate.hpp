#pragma once

#include <cstdint>
#include <vector>

#include "rpmx/dataset.hpp"
#include "rpmx/matrix.hpp"

namespace rpmx {

struct SimulatedData {
  Dataset data;
  std::vector<int> true_assign;
  Matrix<double> true_theta;  // one row per generating cluster
};

// Two balanced clusters of regressions on two binary covariates plus their
// interaction; the second cluster keeps only the main effect of the second
// covariate.
SimulatedData simulate_scenario1(std::uint64_t seed);

// Mixed-type single-population check: five binary and five continuous
// covariates, response driven by the first of each, everything else noise.
SimulatedData simulate_smoke(std::uint64_t seed);

}  // namespace rpmx
