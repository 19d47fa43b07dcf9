#include "rpmx/simulate.hpp"

#include <string>

#include "rpmx/rng.hpp"

namespace rpmx {

SimulatedData simulate_scenario1(std::uint64_t seed) {
  constexpr int kPerCluster = 100;
  Rng rng(seed, 0);

  SimulatedData sim;
  sim.true_theta = Matrix<double>::from_rows({{3.0, 5.0, 9.0}, {0.0, 5.0, 0.0}});

  Dataset& data = sim.data;
  int n = 2 * kPerCluster;
  data.x = Matrix<double>(static_cast<std::size_t>(n), 2);
  data.y.resize(static_cast<std::size_t>(n));
  data.types = {ColumnType::Binary, ColumnType::Binary};
  data.names = {"x1", "x2"};
  sim.true_assign.resize(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    auto ii = static_cast<std::size_t>(i);
    int cluster = i < kPerCluster ? 0 : 1;
    sim.true_assign[ii] = cluster;
    double x1 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    double x2 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    data.x(ii, 0) = x1;
    data.x(ii, 1) = x2;
    auto th = sim.true_theta.row(static_cast<std::size_t>(cluster));
    data.y[ii] = rng.normal(th[0] * x1 + th[1] * x2 + th[2] * x1 * x2, 1.0);
  }
  return sim;
}

SimulatedData simulate_smoke(std::uint64_t seed) {
  constexpr int kN = 500;
  Rng rng(seed, 0);

  SimulatedData sim;
  sim.true_theta = Matrix<double>::from_rows(
      {{2.0, 0.0, 0.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0, 0.0}});

  Dataset& data = sim.data;
  data.x = Matrix<double>(kN, 10);
  data.y.resize(kN);
  sim.true_assign.assign(kN, 0);
  for (int j = 1; j <= 5; ++j) {
    data.names.push_back("b" + std::to_string(j));
    data.types.push_back(ColumnType::Binary);
  }
  for (int j = 1; j <= 5; ++j) {
    data.names.push_back("c" + std::to_string(j));
    data.types.push_back(ColumnType::Continuous);
  }

  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t j = 0; j < 5; ++j)
      data.x(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    for (std::size_t j = 5; j < 10; ++j) data.x(i, j) = rng.normal();
    data.y[i] = rng.normal(2.0 * data.x(i, 0) + 1.5 * data.x(i, 5), 1.0);
  }
  return sim;
}

}  // namespace rpmx
