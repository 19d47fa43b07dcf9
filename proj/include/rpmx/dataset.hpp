#pragma once

#include <string>
#include <vector>

#include "rpmx/dp_prior.hpp"
#include "rpmx/matrix.hpp"

namespace rpmx {

// A response vector plus typed covariate columns.  Binary columns hold only
// 0/1; enforcement happens at load time so samplers can trust the data.
struct Dataset {
  std::vector<double> y;
  Matrix<double> x;  // n x d
  std::vector<ColumnType> types;
  std::vector<std::string> names;  // covariate names, size d
  std::string response_name = "y";

  int n() const { return static_cast<int>(y.size()); }
  int d() const { return static_cast<int>(x.cols()); }
};

}  // namespace rpmx
