#pragma once

#include <cmath>
#include <functional>

#include "polylab/kernels.hpp"

namespace polylab::fixtures {

inline const MollifierSpec& unit_bump3() {
  static const MollifierSpec spec = make_mollifier(1.0, 3);
  return spec;
}

// Coarser than the production table; enough for unit-level checks.
inline const CovarianceTable& unit_table3() {
  static const CovarianceTable table = covariance_build(unit_bump3(), 128);
  return table;
}

// Tensor midpoint rule over the cube [-a, a]^3 with n cells per axis.
inline double cube_midpoint(const std::function<double(double, double, double)>& f, double a, int n) {
  const double w = 2.0 * a / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -a + (i + 0.5) * w;
    for (int j = 0; j < n; ++j) {
      const double y = -a + (j + 0.5) * w;
      for (int k = 0; k < n; ++k) sum += f(x, y, -a + (k + 0.5) * w);
    }
  }
  return sum * w * w * w;
}

// Unnormalized bump exp(-1 / (1 - |x|^2)).
inline double raw_bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

}  // namespace polylab::fixtures
