#include "polylab/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "polylab/counter_rng.hpp"
#include "polylab/error.hpp"

namespace polylab {
namespace {

void check_path_geometry(int dim, double dt, const VirtualNoiseField& field,
                         const MollifierSpec& spec) {
  check_geometry(field, spec);
  if (dim != field.dim) throw GeometryMismatch("path and noise field dimensions differ");
  if (dt != field.dt) throw GeometryMismatch("path and noise field time steps differ");
}

}  // namespace

StepCount round_steps(double T, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step dt must be positive");
  if (!(T > 0.0)) throw InvalidArgument("horizon T must be positive");
  const double ratio = T / dt;
  const long n = std::lround(ratio);
  if (n < 1) throw InvalidArgument("horizon T=" + std::to_string(T) + " is shorter than one step");
  StepCount out;
  out.n_steps = n;
  out.horizon = static_cast<double>(n) * dt;
  out.rounded = std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio);
  return out;
}

std::vector<std::uint64_t> seed_range(std::uint64_t start, std::size_t count, std::uint64_t stride) {
  if (stride == 0) throw InvalidArgument("seed stride must be positive");
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = start + stride * i;
  return seeds;
}

double path_increment_normal(std::uint64_t seed, std::int64_t j, int axis) {
  return PathIncrements(seed).normal(j, axis);
}

BrownianPath sample_path(std::uint64_t seed, int dim, double T, double dt) {
  if (dim < 1) throw InvalidArgument("path dimension must be >= 1");
  const StepCount steps = round_steps(T, dt);
  if (steps.rounded) {
    throw InvalidArgument("T/dt must be an integer; round the horizon first");
  }
  BrownianPath path;
  path.seed = seed;
  path.dim = dim;
  path.dt = dt;
  path.n_steps = steps.n_steps;
  path.positions.assign(static_cast<std::size_t>(steps.n_steps + 1) * dim, 0.0);
  const PathIncrements stream(seed);
  const double sqrt_dt = std::sqrt(dt);
  std::vector<double> w(dim, 0.0);
  for (long j = 0; j < steps.n_steps; ++j) {
    stream.advance(w, j, sqrt_dt);
    std::copy(w.begin(), w.end(), path.positions.begin() + (j + 1) * dim);
  }
  return path;
}

PathAction path_action(const BrownianPath& path, const VirtualNoiseField& field,
                       const MollifierSpec& spec) {
  check_path_geometry(path.dim, path.dt, field, spec);
  PathAction action;
  for (long j = 0; j < path.n_steps; ++j) {
    const PairingResult pr = pair_with_kernel(field, spec, path.at(j), j);
    action.noise_sum += pr.value;
    action.compensator += path.dt * pr.local_v0;
  }
  return action;
}

double hamiltonian(const BrownianPath& path, const VirtualNoiseField& field,
                   const MollifierSpec& spec, double beta) {
  if (beta == 0.0) {
    check_path_geometry(path.dim, path.dt, field, spec);
    return 0.0;
  }
  return log_weight(path_action(path, field, spec), beta);
}

PathBatch simulate_batch(const VirtualNoiseField& field, const MollifierSpec& spec,
                         std::span<const std::uint64_t> seeds, std::span<const long> checkpoints,
                         const ExecPolicy& exec) {
  check_geometry(field, spec);
  if (seeds.empty()) throw InvalidArgument("path seed list is empty");
  if (checkpoints.empty()) throw InvalidArgument("no checkpoints requested");
  if (checkpoints.front() < 1 || !std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
      std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end()) {
    throw InvalidArgument("checkpoints must be strictly increasing positive step counts");
  }

  PathBatch batch;
  batch.dim = field.dim;
  batch.dt = field.dt;
  batch.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  batch.seeds.assign(seeds.begin(), seeds.end());
  const std::size_t n = seeds.size();
  const std::size_t n_ckpt = checkpoints.size();
  const int d = field.dim;
  batch.endpoints.assign(n_ckpt * n * d, 0.0);
  batch.actions.assign(n_ckpt * n, PathAction{});

  const long total_steps = checkpoints.back();
  const double sqrt_dt = std::sqrt(field.dt);
  parallel_chunks(n, exec, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<double> w(d);
    for (std::size_t i = begin; i < end; ++i) {
      std::fill(w.begin(), w.end(), 0.0);
      const PathIncrements stream(seeds[i]);
      PathAction action;
      std::size_t c = 0;
      for (long j = 0;; ++j) {
        while (c < n_ckpt && checkpoints[c] == j) {
          std::copy(w.begin(), w.end(), batch.endpoints.begin() + (c * n + i) * d);
          batch.actions[c * n + i] = action;
          ++c;
        }
        if (j == total_steps) break;
        const PairingResult pr = pair_with_kernel(field, spec, w, j);
        action.noise_sum += pr.value;
        action.compensator += field.dt * pr.local_v0;
        stream.advance(w, j, sqrt_dt);
      }
    }
  });
  return batch;
}

WeightedEnsemble ensemble_from_batch(const PathBatch& batch, std::size_t checkpoint, double beta,
                                     std::uint64_t field_seed, std::size_t reduction_chunk) {
  if (checkpoint >= batch.checkpoints.size()) throw InvalidArgument("checkpoint index out of range");
  WeightedEnsemble ens;
  ens.beta = beta;
  ens.horizon = batch.horizon(checkpoint);
  ens.field_seed = field_seed;
  ens.dim = batch.dim;
  ens.dt = batch.dt;
  ens.reduction_chunk = reduction_chunk;
  const std::size_t n = batch.n_paths();
  ens.endpoints.assign(batch.endpoints.begin() + checkpoint * n * batch.dim,
                       batch.endpoints.begin() + (checkpoint + 1) * n * batch.dim);
  ens.log_weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ens.log_weights[i] = beta == 0.0 ? 0.0 : log_weight(batch.action(checkpoint, i), beta);
  }
  return ens;
}

WeightedEnsemble endpoint_ensemble(const VirtualNoiseField& field, const MollifierSpec& spec,
                                   double beta, double T, double dt,
                                   std::span<const std::uint64_t> path_seeds,
                                   const ExecPolicy& exec) {
  if (dt != field.dt) throw GeometryMismatch("ensemble time step differs from the noise field");
  if (beta < 0.0) throw InvalidArgument("beta must be nonnegative");
  const StepCount steps = round_steps(T, dt);
  const long checkpoint[] = {steps.n_steps};
  const PathBatch batch = simulate_batch(field, spec, path_seeds, checkpoint, exec);
  return ensemble_from_batch(batch, 0, beta, field.master_seed, exec.chunk_size);
}

PartitionEstimate partition_from_log_weights(std::span<const double> log_weights,
                                             std::size_t reduction_chunk) {
  const std::size_t n = log_weights.size();
  if (n == 0) throw InvalidArgument("partition estimate needs at least one path");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(top)) throw InvalidArgument("non-finite log weight");
  const auto scaled = [&](std::size_t i) { return std::exp(log_weights[i] - top); };
  const double sum_w = twin_sum(n, reduction_chunk, scaled);
  const double sum_w2 = twin_sum(n, reduction_chunk, [&](std::size_t i) {
    const double w = scaled(i);
    return w * w;
  });

  const double count = static_cast<double>(n);
  PartitionEstimate out;
  out.n_paths = n;
  out.log_m_hat = top + std::log(sum_w) - std::log(count);
  out.ess = sum_w * sum_w / sum_w2;
  // Sample variance of the scaled weights around their mean.
  const double mean = sum_w / count;
  const double var = n > 1 ? std::max(0.0, (sum_w2 - count * mean * mean) / (count - 1.0)) : 0.0;
  out.log_std_err = std::sqrt(var / count) / mean;
  out.std_err = std::exp(out.log_m_hat) * out.log_std_err;
  return out;
}

PartitionEstimate partition_estimate(const VirtualNoiseField& field, const MollifierSpec& spec,
                                     double beta, double T, double dt,
                                     std::span<const std::uint64_t> path_seeds,
                                     const ExecPolicy& exec) {
  const WeightedEnsemble ens = endpoint_ensemble(field, spec, beta, T, dt, path_seeds, exec);
  return partition_from_log_weights(ens.log_weights, exec.chunk_size);
}

Estimate quenched_moment_with_error(const WeightedEnsemble& ens, std::span<const int> n) {
  if (static_cast<int>(n.size()) != ens.dim) throw InvalidArgument("multi-index dimension mismatch");
  const double inv_sqrt_t = 1.0 / std::sqrt(ens.horizon);
  return weighted_mean(ens, [&](std::size_t i) {
    const auto x = ens.endpoint(i);
    double value = 1.0;
    for (int a = 0; a < ens.dim; ++a) {
      const double scaled = x[a] * inv_sqrt_t;
      for (int p = 0; p < n[a]; ++p) value *= scaled;
    }
    return value;
  });
}

double quenched_moment(const WeightedEnsemble& ens, std::span<const int> n) {
  return quenched_moment_with_error(ens, n).value;
}

Estimate mgf_endpoint_with_error(const WeightedEnsemble& ens, std::span<const double> lambda) {
  const std::size_t n = ens.size();
  if (n == 0) throw InvalidArgument("mgf of an empty ensemble");
  if (static_cast<int>(lambda.size()) != ens.dim) throw InvalidArgument("lambda dimension mismatch");
  const double inv_sqrt_t = 1.0 / std::sqrt(ens.horizon);
  std::vector<double> tilt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = ens.endpoint(i);
    double dot = 0.0;
    for (int a = 0; a < ens.dim; ++a) dot += lambda[a] * x[a];
    tilt[i] = dot * inv_sqrt_t;
  }
  const std::size_t chunk = ens.reduction_chunk;
  const auto log_sum_exp = [&](auto&& term) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) top = std::max(top, term(i));
    return top + std::log(twin_sum(n, chunk, [&](std::size_t i) { return std::exp(term(i) - top); }));
  };
  const double log_norm = log_sum_exp([&](std::size_t i) { return ens.log_weights[i]; });
  const double log_tilted = log_sum_exp([&](std::size_t i) { return ens.log_weights[i] + tilt[i]; });
  const double log_mgf = log_tilted - log_norm;

  // Relative error: sqrt(sum p_i^2 (f_i / mgf - 1)^2) with p_i the normalized weights.
  const double rel_var = twin_sum(n, chunk, [&](std::size_t i) {
    const double p = std::exp(ens.log_weights[i] - log_norm);
    const double ratio = std::exp(tilt[i] - log_mgf) - 1.0;
    return p * p * ratio * ratio;
  });
  const double mgf = std::exp(log_mgf);
  return {mgf, mgf * std::sqrt(rel_var)};
}

double mgf_endpoint(const WeightedEnsemble& ens, std::span<const double> lambda) {
  bool all_zero = true;
  for (double l : lambda) all_zero = all_zero && l == 0.0;
  if (all_zero) {
    if (ens.size() == 0) throw InvalidArgument("mgf of an empty ensemble");
    return 1.0;
  }
  return mgf_endpoint_with_error(ens, lambda).value;
}

PolymerParams she_params_to_polymer(double beta, double epsilon, double t) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(t > 0.0)) throw InvalidArgument("t must be positive");
  if (beta < 0.0) throw InvalidArgument("beta must be nonnegative");
  return {beta, t / (epsilon * epsilon)};
}

double she_endpoint_mgf(const WeightedEnsemble& ens, std::span<const double> lambda) {
  const double t = ens.horizon;
  std::vector<double> scaled(lambda.begin(), lambda.end());
  double norm2 = 0.0;
  for (double& l : scaled) {
    norm2 += l * l;
    l /= std::sqrt(t);
  }
  return std::exp(0.5 * norm2 * (1.0 - 1.0 / t)) * mgf_endpoint(ens, scaled);
}

}  // namespace polylab
