#include "polylab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polylab/error.hpp"

namespace polylab::stats {

Summary summarize(std::span<const double> samples) {
  Summary s;
  s.count = samples.size();
  if (s.count == 0) throw InvalidArgument("summary of an empty sample");
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double x : samples) ss += (x - s.mean) * (x - s.mean);
  if (s.count > 1) {
    s.variance = ss / static_cast<double>(s.count - 1);
    s.std_err = std::sqrt(s.variance / static_cast<double>(s.count));
  }
  return s;
}

double variance_std_err(double variance, std::size_t count) {
  if (count < 2) return 0.0;
  return variance * std::sqrt(2.0 / static_cast<double>(count - 1));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgument("KS statistic of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_p_value(double statistic, std::size_t n) {
  const double root = std::sqrt(static_cast<double>(n));
  const double lambda = (root + 0.12 + 0.11 / root) * statistic;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double median(std::vector<double> samples) {
  if (samples.empty()) throw InvalidArgument("median of an empty sample");
  const std::size_t mid = samples.size() / 2;
  std::nth_element(samples.begin(), samples.begin() + mid, samples.end());
  if (samples.size() % 2 == 1) return samples[mid];
  const double upper = samples[mid];
  const double lower = *std::max_element(samples.begin(), samples.begin() + mid);
  return 0.5 * (lower + upper);
}

double median_std_err(std::span<const double> samples) {
  const Summary s = summarize(samples);
  return std::sqrt(0.5 * std::numbers::pi) * std::sqrt(s.variance / static_cast<double>(s.count));
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("correlation needs paired samples");
  const Summary sx = summarize(x);
  const Summary sy = summarize(y);
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - sx.mean) * (y[i] - sy.mean);
  cov /= static_cast<double>(x.size() - 1);
  return cov / std::sqrt(sx.variance * sy.variance);
}

}  // namespace polylab::stats
