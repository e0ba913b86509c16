#include "polylab/hermite.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "polylab/error.hpp"

namespace polylab {
namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw InvalidArgument("integer overflow in Hermite coefficients");
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw InvalidArgument("integer overflow in Hermite coefficients");
  return out;
}

// One lambda_axis derivative of P(y, T) exp(<lambda, x> - |lambda|^2 T/2) with
// y = x - lambda T: each monomial y^i T^j maps to
//   y^{i + e_axis} T^j            (derivative of the exponential)
//   -i_axis y^{i - e_axis} T^{j+1} (derivative of the polynomial factor).
// At lambda = 0, y = x.
std::map<MonomialKey, std::int64_t> differentiate(const std::map<MonomialKey, std::int64_t>& terms,
                                                  int axis) {
  std::map<MonomialKey, std::int64_t> out;
  for (const auto& [key, coeff] : terms) {
    MonomialKey up = key;
    ++up.powers[axis];
    out[up] = checked_add(out[up], coeff);
    if (key.powers[axis] > 0) {
      MonomialKey down = key;
      --down.powers[axis];
      ++down.t_power;
      out[down] = checked_add(out[down], checked_mul(-key.powers[axis], coeff));
    }
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> values) : n(std::move(values)) {
  if (n.empty()) throw InvalidArgument("multi-index needs dimension >= 1");
  for (int v : n) {
    if (v < 0) throw InvalidArgument("multi-index entries must be nonnegative");
  }
}

int MultiIndex::order() const { return std::accumulate(n.begin(), n.end(), 0); }

MultiIndex axis_index(int dim, int axis, int power) {
  std::vector<int> values(dim, 0);
  values.at(axis) = power;
  return MultiIndex(std::move(values));
}

HermiteCoefficients hermite_coeffs(const MultiIndex& n) {
  if (n.dim() < 1) throw InvalidArgument("multi-index needs dimension >= 1");
  if (n.order() > kMaxHermiteOrder) {
    throw InvalidArgument("order |n|=" + std::to_string(n.order()) + " exceeds the cap " +
                          std::to_string(kMaxHermiteOrder));
  }
  HermiteCoefficients out;
  out.n = n;
  out.terms[MonomialKey{std::vector<int>(n.dim(), 0), 0}] = 1;
  for (int axis = 0; axis < n.dim(); ++axis) {
    for (int step = 0; step < n.n[axis]; ++step) out.terms = differentiate(out.terms, axis);
  }
  return out;
}

double i_n(const HermiteCoefficients& coeffs, double T, std::span<const double> x) {
  if (static_cast<int>(x.size()) != coeffs.n.dim()) throw InvalidArgument("point dimension mismatch");
  double sum = 0.0;
  for (const auto& [key, coeff] : coeffs.terms) {
    double term = static_cast<double>(coeff) * std::pow(T, key.t_power);
    for (std::size_t a = 0; a < x.size(); ++a) term *= std::pow(x[a], key.powers[a]);
    sum += term;
  }
  return sum;
}

double i_n_magnitude(const HermiteCoefficients& coeffs, double T, std::span<const double> x) {
  double sum = 0.0;
  for (const auto& [key, coeff] : coeffs.terms) {
    double term = std::abs(static_cast<double>(coeff)) * std::pow(T, key.t_power);
    for (std::size_t a = 0; a < x.size(); ++a) term *= std::pow(std::abs(x[a]), key.powers[a]);
    sum += term;
  }
  return sum;
}

double hermite_he(int m, double x) {
  if (m < 0) throw InvalidArgument("Hermite degree must be nonnegative");
  if (m == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < m; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double i_n_hermite_product(const MultiIndex& n, double T, std::span<const double> x) {
  if (static_cast<int>(x.size()) != n.dim()) throw InvalidArgument("point dimension mismatch");
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  const double root = std::sqrt(T);
  double product = 1.0;
  for (int a = 0; a < n.dim(); ++a) {
    product *= std::pow(root, n.n[a]) * hermite_he(n.n[a], x[a] / root);
  }
  return product;
}

std::int64_t normal_moment(int m) {
  if (m < 0) throw InvalidArgument("moment order must be nonnegative");
  if (m % 2 == 1) return 0;
  std::int64_t out = 1;
  for (int k = m - 1; k > 1; k -= 2) out = checked_mul(out, k);
  return out;
}

double gaussian_moment(const MultiIndex& n) {
  std::int64_t out = 1;
  for (int v : n.n) out = checked_mul(out, normal_moment(v));
  return static_cast<double>(out);
}

std::int64_t gaussian_expectation_numerator(const HermiteCoefficients& coeffs) {
  std::int64_t sum = 0;
  for (const auto& [key, coeff] : coeffs.terms) {
    std::int64_t term = coeff;
    for (int p : key.powers) term = checked_mul(term, normal_moment(p));
    sum = checked_add(sum, term);
  }
  return sum;
}

double expected_in_under_gaussian(const HermiteCoefficients& coeffs, double T) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  const std::int64_t numerator = gaussian_expectation_numerator(coeffs);
  if (numerator == 0) return 0.0;
  return static_cast<double>(numerator) * std::pow(T, 0.5 * coeffs.n.order());
}

YnEstimate y_n_from_batch(const PathBatch& batch, std::size_t checkpoint, double beta,
                          const HermiteCoefficients& coeffs, std::size_t reduction_chunk) {
  if (coeffs.n.dim() != batch.dim) throw InvalidArgument("multi-index dimension mismatch");
  const std::size_t n_paths = batch.n_paths();
  const double horizon = batch.horizon(checkpoint);
  std::vector<double> samples(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const double weight = beta == 0.0 ? 1.0 : std::exp(log_weight(batch.action(checkpoint, i), beta));
    samples[i] = weight * i_n(coeffs, horizon, batch.endpoint(checkpoint, i));
  }
  const double count = static_cast<double>(n_paths);
  const double mean = twin_sum(n_paths, reduction_chunk, [&](std::size_t i) { return samples[i]; }) / count;
  // Leave-one-out means of a sample mean have jackknife variance
  // sum (x_i - mean)^2 / (N (N - 1)).
  const double spread = twin_sum(n_paths, reduction_chunk, [&](std::size_t i) {
    const double dev = samples[i] - mean;
    return dev * dev;
  });
  YnEstimate out;
  out.n = coeffs.n;
  out.horizon = horizon;
  out.value = mean;
  out.std_err = n_paths > 1 ? std::sqrt(spread / (count * (count - 1.0))) : 0.0;
  out.n_paths = n_paths;
  return out;
}

YnEstimate y_n_estimate(const VirtualNoiseField& field, const MollifierSpec& spec, double beta,
                        double T, double dt, std::span<const std::uint64_t> path_seeds,
                        const MultiIndex& n, const ExecPolicy& exec) {
  if (dt != field.dt) throw GeometryMismatch("estimator time step differs from the noise field");
  const StepCount steps = round_steps(T, dt);
  const long checkpoint[] = {steps.n_steps};
  const PathBatch batch = simulate_batch(field, spec, path_seeds, checkpoint, exec);
  return y_n_from_batch(batch, 0, beta, hermite_coeffs(n), exec.chunk_size);
}

std::vector<DecayPoint> y_n_decay_curve(const VirtualNoiseField& field, const MollifierSpec& spec,
                                        double beta, double dt,
                                        std::span<const std::uint64_t> path_seeds,
                                        const MultiIndex& n, std::span<const double> horizons,
                                        const ExecPolicy& exec) {
  if (dt != field.dt) throw GeometryMismatch("estimator time step differs from the noise field");
  if (horizons.empty()) throw InvalidArgument("no horizons requested");
  std::vector<long> checkpoints;
  for (double T : horizons) checkpoints.push_back(round_steps(T, dt).n_steps);
  for (std::size_t c = 1; c < checkpoints.size(); ++c) {
    if (checkpoints[c] <= checkpoints[c - 1]) throw InvalidArgument("horizons must be increasing");
  }
  const PathBatch batch = simulate_batch(field, spec, path_seeds, checkpoints, exec);
  const HermiteCoefficients coeffs = hermite_coeffs(n);
  std::vector<DecayPoint> curve;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const YnEstimate y = y_n_from_batch(batch, c, beta, coeffs, exec.chunk_size);
    const double scale = std::pow(y.horizon, -0.5 * n.order());
    curve.push_back({y.horizon, scale * y.value, scale * y.std_err});
  }
  return curve;
}

}  // namespace polylab
