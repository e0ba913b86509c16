#include "polylab/kernels.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "polylab/error.hpp"
#include "polylab/quadrature.hpp"

namespace polylab {
namespace {

// Unnormalized bump on the unit ball, as a function of |u|^2.
double unit_bump(double u2) { return u2 < 1.0 ? std::exp(-1.0 / (1.0 - u2)) : 0.0; }

// Absolute tolerances in unit-radius coordinates.
constexpr double kMassTol = 1e-12;
constexpr double kConvolutionTol = 1e-11;

double unit_bump_mass(int dim, int initial_cells) {
  const auto radial = [dim](double u) { return std::pow(u, dim - 1) * unit_bump(u * u); };
  const auto integral = quad::midpoint_refined(radial, 0.0, 1.0, initial_cells, kMassTol);
  return unit_sphere_area(dim) * integral.value;
}

// Integral of b(|u|^2) b(|u - rho e1|^2) over R^dim for the unit bump b.
// The integrand is symmetric about the e1 axis, so it reduces to (u1, s)
// with s the distance from the axis.
double unit_self_convolution(int dim, double rho, int initial_cells) {
  if (rho >= 2.0) return 0.0;
  const double lo = rho - 1.0;
  const double hi = 1.0;
  const auto slice = [dim, rho](double u1) {
    const double a2 = u1 * u1;
    const double b2 = (u1 - rho) * (u1 - rho);
    if (dim == 1) return unit_bump(a2) * unit_bump(b2);
    const double s_max2 = 1.0 - std::max(a2, b2);
    if (s_max2 <= 0.0) return 0.0;
    const auto cross = [=](double s) {
      const double s2 = s * s;
      return std::pow(s, dim - 2) * unit_bump(a2 + s2) * unit_bump(b2 + s2);
    };
    const auto inner = quad::midpoint_refined(cross, 0.0, std::sqrt(s_max2), 16, kConvolutionTol);
    return unit_sphere_area(dim - 1) * inner.value;
  };
  // The slice integrand vanishes to all orders at both ends, where the plain
  // midpoint rule converges faster than any power.
  int n = std::max(8, initial_cells / 2);
  double previous = quad::midpoint(slice, lo, hi, n);
  for (int level = 0; level < 10; ++level) {
    n *= 2;
    const double current = quad::midpoint(slice, lo, hi, n);
    if (std::abs(current - previous) <= kConvolutionTol) return current;
    previous = current;
  }
  throw ConvergenceError("covariance quadrature did not settle at radius " + std::to_string(rho));
}

}  // namespace

double unit_sphere_area(int m) {
  if (m < 1) throw InvalidArgument("sphere dimension must be >= 1");
  const double half = 0.5 * m;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

MollifierSpec make_mollifier(double radius, int dim, int quad_points_per_axis) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("mollifier radius K must be positive, got " + std::to_string(radius));
  }
  if (dim < 1) throw InvalidArgument("dimension must be >= 1");
  if (quad_points_per_axis < 16) throw InvalidArgument("quad_points_per_axis must be >= 16");

  const double mass = std::pow(radius, dim) * unit_bump_mass(dim, quad_points_per_axis);
  MollifierSpec spec;
  spec.radius = radius;
  spec.dim = dim;
  spec.quad_points_per_axis = quad_points_per_axis;
  spec.norm_const = 1.0 / mass;
  if (std::abs(mollifier_mass(spec) - 1.0) > 1e-6) {
    throw ConvergenceError("mollifier normalization did not reach 1e-6");
  }
  return spec;
}

double phi(const MollifierSpec& spec, std::span<const double> x) {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return spec.at_squared_radius(r2);
}

double mollifier_mass(const MollifierSpec& spec) {
  const double k = spec.radius;
  const auto radial = [&](double r) { return std::pow(r, spec.dim - 1) * spec.at_squared_radius(r * r); };
  const auto integral =
      quad::midpoint_refined(radial, 0.0, k, spec.quad_points_per_axis, kMassTol * std::pow(k, spec.dim));
  return unit_sphere_area(spec.dim) * integral.value;
}

double covariance_at(const MollifierSpec& spec, double r) {
  if (r < 0.0) throw InvalidArgument("radius must be nonnegative");
  const double k = spec.radius;
  const double scale = spec.norm_const * spec.norm_const * std::pow(k, spec.dim);
  return scale * unit_self_convolution(spec.dim, r / k, spec.quad_points_per_axis);
}

CovarianceTable covariance_build(const MollifierSpec& spec, int n_radii) {
  if (n_radii < 32) throw InvalidArgument("covariance table needs at least 32 radii");
  CovarianceTable table;
  table.dim = spec.dim;
  table.support = 2.0 * spec.radius;
  table.radii.resize(n_radii);
  table.values.resize(n_radii);
  for (int i = 0; i < n_radii; ++i) {
    const double r = table.support * i / (n_radii - 1);
    table.radii[i] = r;
    table.values[i] = i + 1 == n_radii ? 0.0 : covariance_at(spec, r);
  }
  table.v0 = table.values.front();
  return table;
}

double v_at(const CovarianceTable& table, double r) {
  if (r >= table.support || table.radii.size() < 2) return 0.0;
  if (r <= 0.0) return table.values.front();
  const double step = table.support / static_cast<double>(table.radii.size() - 1);
  const double pos = r / step;
  const auto i = std::min(static_cast<std::size_t>(pos), table.radii.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return table.values[i] + frac * (table.values[i + 1] - table.values[i]);
}

bool is_radially_nonincreasing(const CovarianceTable& table) {
  return std::is_sorted(table.values.rbegin(), table.values.rend());
}

DiscreteNorm discrete_v0(const MollifierSpec& spec, double h, std::span<const double> offset) {
  if (!(h > 0.0)) throw InvalidArgument("lattice spacing h must be positive");
  if (h > 0.5 * spec.radius) {
    throw InvalidArgument("lattice spacing h=" + std::to_string(h) +
                          " too coarse for support radius K=" + std::to_string(spec.radius) +
                          " (need h <= K/2)");
  }
  if (static_cast<int>(offset.size()) != spec.dim) {
    throw InvalidArgument("offset dimension does not match mollifier dimension");
  }
  const int d = spec.dim;
  const double k = spec.radius;
  std::vector<long> lo(d), hi(d), idx(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = static_cast<long>(std::ceil((-k - offset[a]) / h));
    hi[a] = static_cast<long>(std::floor((k - offset[a]) / h));
    idx[a] = lo[a];
  }
  double sum = 0.0;
  for (;;) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double y = offset[a] + h * static_cast<double>(idx[a]);
      r2 += y * y;
    }
    const double value = spec.at_squared_radius(r2);
    sum += value * value;
    int a = d - 1;
    while (a >= 0 && idx[a] == hi[a]) {
      idx[a] = lo[a];
      --a;
    }
    if (a < 0) break;
    ++idx[a];
  }
  DiscreteNorm norm;
  norm.h = h;
  norm.v0_h = sum * std::pow(h, d);
  norm.offset.assign(offset.begin(), offset.end());
  return norm;
}

}  // namespace polylab
