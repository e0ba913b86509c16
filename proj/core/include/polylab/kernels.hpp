#pragma once

// Mollifier phi (standard smooth bump of radius K, unit mass), its
// self-convolution V = phi * phi tabulated radially, and lattice sums of
// phi^2 used as exact discrete renormalization constants.

#include <cmath>
#include <span>
#include <vector>

namespace polylab {

struct MollifierSpec {
  double radius = 1.0;  // K; phi vanishes for |x| >= K
  int dim = 3;
  double norm_const = 1.0;  // phi = norm_const * exp(-1 / (1 - |x/K|^2))
  int quad_points_per_axis = 64;

  // phi as a function of the squared distance to the centre.
  double at_squared_radius(double r2) const noexcept {
    const double s = r2 / (radius * radius);
    return s < 1.0 ? norm_const * std::exp(-1.0 / (1.0 - s)) : 0.0;
  }
};

MollifierSpec make_mollifier(double radius, int dim, int quad_points_per_axis = 64);

double phi(const MollifierSpec& spec, std::span<const double> x);

// Integral of phi computed with the mollifier's own radial quadrature.
double mollifier_mass(const MollifierSpec& spec);

// Surface area of the unit sphere in R^m (m >= 1; 2 for m = 1).
double unit_sphere_area(int m);

struct CovarianceTable {
  std::vector<double> radii;   // uniform on [0, 2K]
  std::vector<double> values;  // V(radii[i])
  double v0 = 0.0;             // V(0) = integral of phi^2
  double support = 0.0;        // 2K
  int dim = 0;
};

inline constexpr int kDefaultCovarianceRadii = 512;

CovarianceTable covariance_build(const MollifierSpec& spec, int n_radii = kDefaultCovarianceRadii);

// V(r) by direct quadrature at one radius (the routine behind the table).
double covariance_at(const MollifierSpec& spec, double r);

// Linear interpolation of the table; exactly 0 for r >= 2K.
double v_at(const CovarianceTable& table, double r);

bool is_radially_nonincreasing(const CovarianceTable& table);

struct DiscreteNorm {
  double h = 0.0;
  double v0_h = 0.0;  // sum_k phi(y_k)^2 h^d over lattice points y_k = offset + h k
  std::vector<double> offset;
};

DiscreteNorm discrete_v0(const MollifierSpec& spec, double h, std::span<const double> offset);

}  // namespace polylab
