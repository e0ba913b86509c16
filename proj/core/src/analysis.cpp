#include "polylab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "polylab/counter_rng.hpp"
#include "polylab/error.hpp"
#include "polylab/quadrature.hpp"

namespace polylab {
namespace {

constexpr std::uint64_t kOccupationStream = 1;
constexpr std::uint64_t kCollisionStream = 2;

// Normals for oracle-only Monte Carlo, keyed by (stream, sample, step).
class OracleNormals {
 public:
  OracleNormals(std::uint64_t stream, std::uint64_t sample)
      : base_(rng::absorb(rng::domain_seed(rng::kOracleDomain, stream), sample)) {}

  void fill(std::int64_t step, std::span<double> out) const {
    const std::uint64_t prefix = rng::absorb(base_, static_cast<std::uint64_t>(step));
    for (std::size_t a = 0; a < out.size(); a += 2) {
      const auto [c, s] = rng::normal_pair(rng::absorb(prefix, a >> 1));
      out[a] = c;
      if (a + 1 < out.size()) out[a + 1] = s;
    }
  }

 private:
  std::uint64_t base_;
};

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

McEstimate sample_mean(std::span<const double> samples, std::size_t chunk) {
  const std::size_t n = samples.size();
  if (n == 0) throw InvalidArgument("no samples");
  const double count = static_cast<double>(n);
  const ExecPolicy serial{1, chunk};
  const auto sum = [&](auto&& term) {
    return chunked_reduce(
        n, serial, 0.0, [&](double& acc, std::size_t i) { acc += term(i); },
        [](double a, double b) { return a + b; });
  };
  const double mean = sum([&](std::size_t i) { return samples[i]; }) / count;
  const double ss = sum([&](std::size_t i) {
    const double dev = samples[i] - mean;
    return dev * dev;
  });
  return {mean, n > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0};
}

void check_table_dim(const CovarianceTable& table, int dim) {
  if (table.dim != dim) throw InvalidArgument("covariance table dimension differs from d");
}

}  // namespace

GreenQuadrature make_green_quadrature(int dim) {
  if (dim < 3) {
    throw InvalidArgument("Green potential needs a transient dimension d >= 3, got " + std::to_string(dim));
  }
  GreenQuadrature g;
  g.dim = dim;
  g.green_const = std::tgamma(0.5 * dim - 1.0) / (2.0 * std::pow(std::numbers::pi, 0.5 * dim));
  return g;
}

double green_potential_integral(const CovarianceTable& table, int dim) {
  const GreenQuadrature green = make_green_quadrature(dim);
  check_table_dim(table, dim);
  // Radial form: area(S^{d-1}) * G(r) * r^{d-1} = area * green_const * r.
  const double prefactor = unit_sphere_area(dim) * green.green_const;
  const auto integrand = [&](double r) { return r * v_at(table, std::numbers::sqrt2 * r); };
  // Integrate node to node so each piece of the interpolant is smooth.
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < table.radii.size(); ++i) {
    const double a = table.radii[i] / std::numbers::sqrt2;
    const double b = table.radii[i + 1] / std::numbers::sqrt2;
    if (table.values[i] == 0.0 && table.values[i + 1] == 0.0) continue;
    total += quad::adaptive(integrand, a, b, green.rel_tol);
  }
  return prefactor * total;
}

KhasminskiiEntry khasminskii_bound(double g, double beta, double multiplier) {
  if (multiplier < 1.0) throw InvalidArgument("Khas'minskii multiplier must be >= 1");
  if (beta < 0.0) throw InvalidArgument("beta must be nonnegative");
  KhasminskiiEntry entry;
  entry.beta = beta;
  entry.multiplier = multiplier;
  entry.eta = multiplier * beta * beta * g;
  if (entry.eta < 1.0) entry.l2_bound = 1.0 / (1.0 - entry.eta);
  return entry;
}

BoundReport bound_report(const CovarianceTable& table, int dim) {
  BoundReport report;
  report.dim = dim;
  report.green_integral = green_potential_integral(table, dim);
  if (!(report.green_integral > 0.0)) throw InvalidArgument("Green potential integral is not positive");
  report.beta_lower_bound = 1.0 / std::sqrt(report.green_integral);
  return report;
}

double occupation_tail_bound(const CovarianceTable& table, int dim, double t_max) {
  check_table_dim(table, dim);
  if (!(t_max > 0.0)) throw InvalidArgument("T_max must be positive");
  // Mass of V, then int V(sqrt2 y) dy = 2^{-d/2} * mass; the heat kernel is
  // at most (2 pi s)^{-d/2}, whose tail integral from t_max is
  // (2 pi)^{-d/2} t_max^{1 - d/2} / (d/2 - 1).
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < table.radii.size(); ++i) {
    const auto shell = [&](double r) { return std::pow(r, dim - 1) * v_at(table, r); };
    if (table.values[i] == 0.0 && table.values[i + 1] == 0.0) continue;
    mass += quad::adaptive(shell, table.radii[i], table.radii[i + 1], 1e-8);
  }
  mass *= unit_sphere_area(dim);
  const double half = 0.5 * dim;
  return mass * std::pow(2.0, -half) * std::pow(2.0 * std::numbers::pi, -half) *
         std::pow(t_max, 1.0 - half) / (half - 1.0);
}

OccupationEstimate occupation_oracle_mc(const CovarianceTable& table, int dim, std::size_t n_paths,
                                        double dt, double t_max, std::uint64_t seed_start,
                                        const ExecPolicy& exec) {
  make_green_quadrature(dim);
  check_table_dim(table, dim);
  if (n_paths == 0) throw InvalidArgument("occupation oracle needs at least one path");
  if (!(dt > 0.0) || !(t_max > dt)) throw InvalidArgument("need 0 < dt < T_max");

  const double fine_until = 100.0 * dt;
  std::vector<double> samples(n_paths);
  parallel_chunks(n_paths, exec, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<double> w(dim), z(dim);
    for (std::size_t p = begin; p < end; ++p) {
      const OracleNormals normals(kOccupationStream, seed_start + p);
      std::fill(w.begin(), w.end(), 0.0);
      double s = 0.0;
      double prev = v_at(table, 0.0);
      double integral = 0.0;
      for (std::int64_t step = 0; s < t_max; ++step) {
        const double step_size = std::min(s < fine_until ? dt : 0.01 * s, t_max - s);
        normals.fill(step, z);
        const double root = std::sqrt(step_size);
        for (int a = 0; a < dim; ++a) w[a] += root * z[a];
        const double cur = v_at(table, std::numbers::sqrt2 * norm(w));
        integral += 0.5 * step_size * (prev + cur);
        prev = cur;
        s += step_size;
      }
      samples[p] = integral;
    }
  });
  const McEstimate mean = sample_mean(samples, exec.chunk_size);
  OccupationEstimate out{mean.value, mean.std_err, occupation_tail_bound(table, dim, t_max)};
  if (out.tail_bound > 0.01 * out.value) {
    throw InvalidArgument("occupation tail bound " + std::to_string(out.tail_bound) +
                          " exceeds 1% of the estimate; increase T_max");
  }
  return out;
}

std::vector<McEstimate> pair_second_moment_curve(const CovarianceTable& table, int dim,
                                                 std::span<const double> betas, double T, double dt,
                                                 std::size_t n_pairs, std::uint64_t seed_start,
                                                 const ExecPolicy& exec) {
  check_table_dim(table, dim);
  if (n_pairs == 0) throw InvalidArgument("need at least one path pair");
  const StepCount steps = round_steps(T, dt);
  const double sqrt_dt = std::sqrt(dt);
  // Pair p uses path seeds seed_start + 4p and seed_start + 4p + 2, which
  // are never antithetic twins of each other.
  std::vector<double> exponents(n_pairs);
  parallel_chunks(n_pairs, exec, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<double> w(dim), v(dim), diff(dim);
    for (std::size_t p = begin; p < end; ++p) {
      const PathIncrements first(seed_start + 4 * p);
      const PathIncrements second(seed_start + 4 * p + 2);
      std::fill(w.begin(), w.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      double acc = 0.0;
      for (long j = 0; j < steps.n_steps; ++j) {
        for (int a = 0; a < dim; ++a) diff[a] = w[a] - v[a];
        acc += dt * v_at(table, norm(diff));
        first.advance(w, j, sqrt_dt);
        second.advance(v, j, sqrt_dt);
      }
      exponents[p] = acc;
    }
  });
  std::vector<McEstimate> out;
  std::vector<double> samples(n_pairs);
  for (double beta : betas) {
    for (std::size_t p = 0; p < n_pairs; ++p) samples[p] = std::exp(beta * beta * exponents[p]);
    out.push_back(sample_mean(samples, exec.chunk_size));
  }
  return out;
}

McEstimate pair_second_moment_mc(const CovarianceTable& table, int dim, double beta, double T,
                                 double dt, std::size_t n_pairs, std::uint64_t seed_start,
                                 const ExecPolicy& exec) {
  const double betas[] = {beta};
  return pair_second_moment_curve(table, dim, betas, T, dt, n_pairs, seed_start, exec).front();
}

McEstimate collision_probability(double radius, int dim, double T, double dt, std::size_t n_pairs,
                                 std::uint64_t seed_start, const ExecPolicy& exec) {
  if (radius < 0.0) throw InvalidArgument("support radius must be nonnegative");
  if (dim < 1) throw InvalidArgument("dimension must be >= 1");
  if (T < 2.0) throw InvalidArgument("collision window needs T >= 2");
  if (n_pairs == 0) throw InvalidArgument("need at least one path pair");
  const StepCount window = round_steps(1.0, dt);
  const double reach2 = 4.0 * radius * radius;
  // W - W' is a Brownian motion with covariance 2t I; start it exactly at
  // time T - 1 and walk the dt-grid of the unit window.
  std::vector<double> hits(n_pairs);
  parallel_chunks(n_pairs, exec, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<double> diff(dim), z(dim);
    for (std::size_t p = begin; p < end; ++p) {
      const OracleNormals normals(kCollisionStream, seed_start + p);
      normals.fill(0, z);
      const double start_scale = std::sqrt(2.0 * (T - 1.0));
      for (int a = 0; a < dim; ++a) diff[a] = start_scale * z[a];
      const auto inside = [&] {
        double s = 0.0;
        for (double x : diff) s += x * x;
        return s <= reach2;
      };
      bool hit = inside();
      const double step_scale = std::sqrt(2.0 * dt);
      for (long j = 1; j <= window.n_steps && !hit; ++j) {
        normals.fill(j, z);
        for (int a = 0; a < dim; ++a) diff[a] += step_scale * z[a];
        hit = inside();
      }
      hits[p] = hit ? 1.0 : 0.0;
    }
  });
  const McEstimate mean = sample_mean(hits, exec.chunk_size);
  const double count = static_cast<double>(n_pairs);
  return {mean.value, std::sqrt(mean.value * (1.0 - mean.value) / count)};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope needs matching series of length >= 2");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("log-log slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double offdiagonal_second_moment(std::span<const double> log_weights) {
  const std::size_t n = log_weights.size();
  if (n < 2) throw InvalidArgument("off-diagonal second moment needs at least two paths");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double sum = 0.0, sum_sq = 0.0;
  for (double h : log_weights) {
    const double w = std::exp(h - top);
    sum += w;
    sum_sq += w * w;
  }
  const double count = static_cast<double>(n);
  return std::exp(2.0 * top) * (sum * sum - sum_sq) / (count * (count - 1.0));
}

McEstimate martingale_diff_second_moment(const VirtualNoiseField& base_field,
                                         std::span<const std::uint64_t> noise_seeds,
                                         const MollifierSpec& spec, double beta,
                                         const MultiIndex& n, double T,
                                         std::span<const std::uint64_t> path_seeds,
                                         const ExecPolicy& exec) {
  if (noise_seeds.empty()) throw InvalidArgument("need at least one noise seed");
  if (T < 2.0) throw InvalidArgument("martingale difference needs T >= 2");
  const long checkpoints[] = {round_steps(T - 1.0, base_field.dt).n_steps,
                              round_steps(T, base_field.dt).n_steps};
  const HermiteCoefficients coeffs = hermite_coeffs(n);
  std::vector<double> squares;
  squares.reserve(noise_seeds.size());
  for (std::uint64_t seed : noise_seeds) {
    const VirtualNoiseField field = with_seed(base_field, seed);
    const PathBatch batch = simulate_batch(field, spec, path_seeds, checkpoints, exec);
    const double earlier = y_n_from_batch(batch, 0, beta, coeffs, exec.chunk_size).value;
    const double later = y_n_from_batch(batch, 1, beta, coeffs, exec.chunk_size).value;
    squares.push_back((later - earlier) * (later - earlier));
  }
  return sample_mean(squares, exec.chunk_size);
}

}  // namespace polylab
