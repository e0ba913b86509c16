#pragma once

// The polynomials I_n(T, x) = d^|n| / dlambda^n exp(<lambda, x> - |lambda|^2 T / 2) at
// lambda = 0, kept as exact integer coefficient tables
//   I_n(T, x) = sum A_n(i_1..i_d, j) x_1^{i_1} ... x_d^{i_d} T^j,
// plus Gaussian moment algebra and the Monte Carlo estimator of
// Y_n(T) = E_0[exp(H_T) I_n(T, W_T)].

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "polylab/noise.hpp"
#include "polylab/parallel.hpp"
#include "polylab/polymer.hpp"

namespace polylab {

struct MultiIndex {
  std::vector<int> n;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> values);

  int dim() const { return static_cast<int>(n.size()); }
  int order() const;
  std::span<const int> span() const { return n; }
  auto operator<=>(const MultiIndex&) const = default;
};

// Unit multi-index e_axis scaled by `power`.
MultiIndex axis_index(int dim, int axis, int power = 1);

struct MonomialKey {
  std::vector<int> powers;  // exponents of x_1 .. x_d
  int t_power = 0;          // exponent of T
  auto operator<=>(const MonomialKey&) const = default;
};

inline constexpr int kMaxHermiteOrder = 12;

struct HermiteCoefficients {
  MultiIndex n;
  std::map<MonomialKey, std::int64_t> terms;  // nonzero coefficients only
};

HermiteCoefficients hermite_coeffs(const MultiIndex& n);

// Coefficient sum.
double i_n(const HermiteCoefficients& coeffs, double T, std::span<const double> x);

// prod_k T^{n_k/2} He_{n_k}(x_k / sqrt T), probabilists' Hermite polynomials.
double i_n_hermite_product(const MultiIndex& n, double T, std::span<const double> x);

// Sum of |term| magnitudes of the coefficient sum; the scale against which
// the two evaluation routes are compared.
double i_n_magnitude(const HermiteCoefficients& coeffs, double T, std::span<const double> x);

// Probabilists' Hermite He_m(x) by the three-term recurrence.
double hermite_he(int m, double x);

// (m - 1)!! for even m, 0 for odd m; E[Z^m] of a standard normal.
std::int64_t normal_moment(int m);

// prod_i E[Z^{n_i}] for iid standard normals.
double gaussian_moment(const MultiIndex& n);

// Exact E[I_n(T, sqrt(T) Z)] / T^{|n|/2} as an integer: every surviving term
// carries the same power T^{|n|/2}.
std::int64_t gaussian_expectation_numerator(const HermiteCoefficients& coeffs);

// E[I_n(T, W_T)] for W_T ~ N(0, T I); 1 for n = 0 and exactly 0 otherwise.
double expected_in_under_gaussian(const HermiteCoefficients& coeffs, double T);

struct YnEstimate {
  MultiIndex n;
  double horizon = 0.0;
  double value = 0.0;
  double std_err = 0.0;
  std::size_t n_paths = 0;
};

// (1/N) sum_i e^{H_i} I_n(T, W_T,i) with jackknife error, from a batch checkpoint.
YnEstimate y_n_from_batch(const PathBatch& batch, std::size_t checkpoint, double beta,
                          const HermiteCoefficients& coeffs, std::size_t reduction_chunk = 256);

YnEstimate y_n_estimate(const VirtualNoiseField& field, const MollifierSpec& spec, double beta,
                        double T, double dt, std::span<const std::uint64_t> path_seeds,
                        const MultiIndex& n, const ExecPolicy& exec = {});

struct DecayPoint {
  double horizon = 0.0;
  double scaled = 0.0;  // T^{-|n|/2} Y_n(T)
  double std_err = 0.0;
};

// One pass over the paths; every horizon reuses the noise on [0, T].
std::vector<DecayPoint> y_n_decay_curve(const VirtualNoiseField& field, const MollifierSpec& spec,
                                        double beta, double dt,
                                        std::span<const std::uint64_t> path_seeds,
                                        const MultiIndex& n, std::span<const double> horizons,
                                        const ExecPolicy& exec = {});

}  // namespace polylab
