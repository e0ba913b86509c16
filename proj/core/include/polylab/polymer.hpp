#pragma once

// Brownian paths in the quenched noise field, their Hamiltonians, the
// partition-function estimator and the quenched endpoint measure as a
// weighted ensemble.
//
// Path seeds come in antithetic twins: seeds 2m and 2m+1 drive the same
// Gaussian increments with opposite signs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polylab/counter_rng.hpp"
#include "polylab/kernels.hpp"
#include "polylab/noise.hpp"
#include "polylab/parallel.hpp"

namespace polylab {

struct StepCount {
  long n_steps = 0;
  double horizon = 0.0;  // n_steps * dt
  bool rounded = false;  // requested T was not an integer multiple of dt
};

// Nearest step count for horizon T; throws on T <= 0, dt <= 0 or zero steps.
StepCount round_steps(double T, double dt);

// start, start + stride, ... With stride 2 and an even start no two seeds
// are antithetic twins.
std::vector<std::uint64_t> seed_range(std::uint64_t start, std::size_t count,
                                      std::uint64_t stride = 1);

// Counter-based Gaussian increments of one path seed.
class PathIncrements {
 public:
  explicit PathIncrements(std::uint64_t seed)
      : base_(rng::domain_seed(rng::kPathDomain, seed >> 1)), sign_((seed & 1) ? -1.0 : 1.0) {}

  double normal(std::int64_t j, int axis) const {
    const std::uint64_t prefix = rng::absorb(base_, static_cast<std::uint64_t>(j));
    return sign_ * rng::normal_from_prefix(prefix, axis);
  }

  // position += sqrt(dt) * Z_j, where Z_j is the step-j normal vector.
  void advance(std::span<double> position, std::int64_t j, double sqrt_dt) const {
    const std::uint64_t prefix = rng::absorb(base_, static_cast<std::uint64_t>(j));
    for (std::size_t a = 0; a < position.size(); a += 2) {
      const auto [c, s] = rng::normal_pair(rng::absorb(prefix, a >> 1));
      position[a] += sqrt_dt * (sign_ * c);
      if (a + 1 < position.size()) position[a + 1] += sqrt_dt * (sign_ * s);
    }
  }

 private:
  std::uint64_t base_;
  double sign_;
};

// Standard normal driving increment (step j, axis) of a path seed, sign
// included.
double path_increment_normal(std::uint64_t seed, std::int64_t j, int axis);

struct BrownianPath {
  std::uint64_t seed = 0;
  int dim = 0;
  double dt = 0.0;
  long n_steps = 0;
  std::vector<double> positions;  // (n_steps + 1) x dim, row j is W_{j dt}

  std::span<const double> at(long j) const {
    return {positions.data() + static_cast<std::size_t>(j) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const double> endpoint() const { return at(n_steps); }
  double horizon() const { return dt * static_cast<double>(n_steps); }
};

// T / dt must be an integer up to rounding noise (use round_steps first).
BrownianPath sample_path(std::uint64_t seed, int dim, double T, double dt);

// Noise functional of a path: H(beta) = beta * noise_sum - beta^2/2 * compensator.
struct PathAction {
  double noise_sum = 0.0;    // sum_j pairing value at W_{j dt}
  double compensator = 0.0;  // sum_j dt * local_v0_j
};

inline double log_weight(const PathAction& action, double beta) {
  return beta * action.noise_sum - 0.5 * beta * beta * action.compensator;
}

// Same action with the continuum constant T * V(0) as compensator.
inline double continuum_log_weight(const PathAction& action, double beta, double horizon, double v0) {
  return beta * action.noise_sum - 0.5 * beta * beta * horizon * v0;
}

PathAction path_action(const BrownianPath& path, const VirtualNoiseField& field,
                       const MollifierSpec& spec);

double hamiltonian(const BrownianPath& path, const VirtualNoiseField& field,
                   const MollifierSpec& spec, double beta);

// Endpoints and actions of many paths, recorded at several step counts in
// one pass. Layout is [checkpoint][path].
struct PathBatch {
  int dim = 0;
  double dt = 0.0;
  std::vector<long> checkpoints;  // increasing step counts
  std::vector<std::uint64_t> seeds;
  std::vector<double> endpoints;
  std::vector<PathAction> actions;

  std::size_t n_paths() const { return seeds.size(); }
  double horizon(std::size_t c) const { return dt * static_cast<double>(checkpoints[c]); }
  std::span<const double> endpoint(std::size_t c, std::size_t i) const {
    return {endpoints.data() + (c * n_paths() + i) * dim, static_cast<std::size_t>(dim)};
  }
  const PathAction& action(std::size_t c, std::size_t i) const { return actions[c * n_paths() + i]; }
};

PathBatch simulate_batch(const VirtualNoiseField& field, const MollifierSpec& spec,
                         std::span<const std::uint64_t> seeds, std::span<const long> checkpoints,
                         const ExecPolicy& exec = {});

struct WeightedEnsemble {
  double beta = 0.0;
  double horizon = 0.0;
  std::uint64_t field_seed = 0;
  int dim = 0;
  double dt = 0.0;
  std::size_t reduction_chunk = 256;
  std::vector<double> endpoints;  // size() x dim
  std::vector<double> log_weights;

  std::size_t size() const { return log_weights.size(); }
  std::span<const double> endpoint(std::size_t i) const {
    return {endpoints.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

WeightedEnsemble ensemble_from_batch(const PathBatch& batch, std::size_t checkpoint, double beta,
                                     std::uint64_t field_seed, std::size_t reduction_chunk = 256);

WeightedEnsemble endpoint_ensemble(const VirtualNoiseField& field, const MollifierSpec& spec,
                                   double beta, double T, double dt,
                                   std::span<const std::uint64_t> path_seeds,
                                   const ExecPolicy& exec = {});

struct PartitionEstimate {
  double log_m_hat = 0.0;     // log((1/N) sum_i e^{H_i})
  double std_err = 0.0;       // standard error of M_hat itself
  double log_std_err = 0.0;   // std_err / M_hat
  double ess = 0.0;           // (sum w)^2 / sum w^2
  std::size_t n_paths = 0;
};

PartitionEstimate partition_from_log_weights(std::span<const double> log_weights,
                                             std::size_t reduction_chunk = 256);

PartitionEstimate partition_estimate(const VirtualNoiseField& field, const MollifierSpec& spec,
                                     double beta, double T, double dt,
                                     std::span<const std::uint64_t> path_seeds,
                                     const ExecPolicy& exec = {});

struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

// Self-normalized weighted mean of f(i) and its delta-method standard error.
template <class Fn>
Estimate weighted_mean(const WeightedEnsemble& ens, Fn&& f);

// E^Q[prod_i (W_T^(i) / sqrt T)^{n_i}].
Estimate quenched_moment_with_error(const WeightedEnsemble& ens, std::span<const int> n);
double quenched_moment(const WeightedEnsemble& ens, std::span<const int> n);

// E^Q[exp <lambda, W_T / sqrt T>], evaluated in log space.
Estimate mgf_endpoint_with_error(const WeightedEnsemble& ens, std::span<const double> lambda);
double mgf_endpoint(const WeightedEnsemble& ens, std::span<const double> lambda);

struct PolymerParams {
  double beta = 0.0;
  double horizon = 0.0;
};

// Mollified heat-equation parameters (beta, epsilon, t) to the polymer
// horizon T = t / epsilon^2 at the same beta.
PolymerParams she_params_to_polymer(double beta, double epsilon, double t);

// Tilted endpoint MGF of the heat-equation path measure at T = epsilon^-2,
// written through the polymer ensemble at horizon T:
// exp(|lambda|^2/2 (1 - 1/T)) * E^Q[exp <lambda / sqrt T, W_T / sqrt T>].
double she_endpoint_mgf(const WeightedEnsemble& ens, std::span<const double> lambda);

}  // namespace polylab

#include "polylab/detail/weighted_mean.ipp"
