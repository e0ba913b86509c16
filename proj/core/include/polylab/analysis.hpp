#pragma once

// Deterministic numerics and Monte Carlo oracles around the L2 region:
// Green-potential quadrature and the Khas'minskii lower bound on beta,
// the pair-path second moment of M_T, collision probabilities of two
// independent paths, and the martingale-difference second moment of Y_n.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polylab/hermite.hpp"
#include "polylab/kernels.hpp"
#include "polylab/noise.hpp"
#include "polylab/parallel.hpp"
#include "polylab/polymer.hpp"

namespace polylab {

// Green function of (1/2) Laplacian in d >= 3: G(r) = green_const * r^{2-d}.
struct GreenQuadrature {
  int dim = 3;
  double green_const = 0.0;  // Gamma(d/2 - 1) / (2 pi^{d/2})
  double rel_tol = 1e-6;
};

GreenQuadrature make_green_quadrature(int dim);

// g = int G(0, y) V(sqrt(2) y) dy = E_0[int_0^inf V(sqrt(2) W_s) ds].
double green_potential_integral(const CovarianceTable& table, int dim);

struct KhasminskiiEntry {
  double beta = 0.0;
  double multiplier = 1.0;
  double eta = 0.0;                  // multiplier * beta^2 * g
  std::optional<double> l2_bound;    // 1 / (1 - eta) when eta < 1
  bool diverges() const { return !l2_bound.has_value(); }
};

KhasminskiiEntry khasminskii_bound(double g, double beta, double multiplier = 1.0);

struct BoundReport {
  int dim = 0;
  double green_integral = 0.0;
  double beta_lower_bound = 0.0;  // g^{-1/2}
  std::vector<KhasminskiiEntry> entries;
};

BoundReport bound_report(const CovarianceTable& table, int dim);

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;
};

struct OccupationEstimate {
  double value = 0.0;
  double std_err = 0.0;
  double tail_bound = 0.0;  // majorant of E_0[int_{T_max}^inf V(sqrt(2) W_s) ds]
};

// Trapezoidal occupation integral along sampled paths on [0, T_max]. The
// time grid uses step dt until s reaches 100 dt and then grows
// geometrically (1% of s per step). Throws when tail_bound exceeds 1% of the
// estimate.
OccupationEstimate occupation_oracle_mc(const CovarianceTable& table, int dim, std::size_t n_paths,
                                        double dt, double t_max, std::uint64_t seed_start = 0,
                                        const ExecPolicy& exec = {});

// Analytic majorant of the occupation tail beyond t_max.
double occupation_tail_bound(const CovarianceTable& table, int dim, double t_max);

// E over independent path pairs of exp(beta^2 sum_j V(W_j - W'_j) dt).
McEstimate pair_second_moment_mc(const CovarianceTable& table, int dim, double beta, double T,
                                 double dt, std::size_t n_pairs, std::uint64_t seed_start = 0,
                                 const ExecPolicy& exec = {});

// Same functional over the pair seeds, for several beta at once (shared
// samples, so monotonicity in beta holds sample by sample).
std::vector<McEstimate> pair_second_moment_curve(const CovarianceTable& table, int dim,
                                                 std::span<const double> betas, double T, double dt,
                                                 std::size_t n_pairs, std::uint64_t seed_start = 0,
                                                 const ExecPolicy& exec = {});

// Fraction of independent path pairs with min |W_s - W'_s| <= 2K over the
// dt-grid of [T - 1, T].
McEstimate collision_probability(double radius, int dim, double T, double dt, std::size_t n_pairs,
                                 std::uint64_t seed_start = 0, const ExecPolicy& exec = {});

// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// Noise-side estimate of E[M_T^2] from one noise realization: the
// off-diagonal U-statistic sum_{i != j} w_i w_j / (N (N - 1)), which drops
// the path-MC self-pairs.
double offdiagonal_second_moment(std::span<const double> log_weights);

// E[(Y_n(T) - Y_n(T-1))^2] over noise seeds, with the same path seeds for
// every realization and both horizons taken from one pass.
McEstimate martingale_diff_second_moment(const VirtualNoiseField& base_field,
                                         std::span<const std::uint64_t> noise_seeds,
                                         const MollifierSpec& spec, double beta,
                                         const MultiIndex& n, double T,
                                         std::span<const std::uint64_t> path_seeds,
                                         const ExecPolicy& exec = {});

}  // namespace polylab
