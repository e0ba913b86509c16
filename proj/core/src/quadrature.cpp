#include "polylab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "polylab/error.hpp"

namespace polylab::quad {

double midpoint(const std::function<double(double)>& f, double a, double b, int n) {
  if (n <= 0) throw InvalidArgument("midpoint rule needs a positive cell count");
  const double width = (b - a) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += f(a + (i + 0.5) * width);
  return sum * width;
}

RefinedIntegral midpoint_refined(const std::function<double(double)>& f, double a, double b,
                                 int initial_cells, double abs_tol, int max_levels) {
  if (b <= a) return {};
  int n = initial_cells;
  double coarse = midpoint(f, a, b, n);
  double previous = coarse;
  bool have_previous = false;
  for (int level = 0; level < max_levels; ++level) {
    const double fine = midpoint(f, a, b, 2 * n);
    // Midpoint error expands in even powers of the cell width.
    const double extrapolated = (4.0 * fine - coarse) / 3.0;
    if (have_previous) {
      const double change = std::abs(extrapolated - previous);
      if (change <= abs_tol) return {extrapolated, change, 2 * n};
    }
    previous = extrapolated;
    have_previous = true;
    coarse = fine;
    n *= 2;
  }
  throw ConvergenceError("midpoint refinement did not settle to " + std::to_string(abs_tol) +
                         " after " + std::to_string(n) + " cells");
}

double adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (b <= a) return 0.0;
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 20, rel_tol, &error);
  if (!std::isfinite(value)) throw ConvergenceError("adaptive quadrature produced non-finite value");
  if (error > rel_tol * std::abs(value) && error > 1e-300) {
    throw ConvergenceError("adaptive quadrature error estimate " + std::to_string(error) +
                           " exceeds tolerance");
  }
  return value;
}

}  // namespace polylab::quad
