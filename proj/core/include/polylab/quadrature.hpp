#pragma once

#include <functional>

namespace polylab::quad {

// Composite midpoint rule with n equal cells on [a, b].
double midpoint(const std::function<double(double)>& f, double a, double b, int n);

struct RefinedIntegral {
  double value = 0.0;
  double last_change = 0.0;  // |value - previous level|
  int cells = 0;             // cells of the finest midpoint level used
};

// Midpoint rule with one Richardson step per level, doubling the cell count
// from `initial_cells` until two successive extrapolated values differ by at
// most `abs_tol`. Throws ConvergenceError after `max_levels` doublings.
RefinedIntegral midpoint_refined(const std::function<double(double)>& f, double a, double b,
                                 int initial_cells, double abs_tol, int max_levels = 14);

// Adaptive Gauss-Kronrod (15 point) to the requested relative tolerance.
double adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol);

}  // namespace polylab::quad
