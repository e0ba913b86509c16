#pragma once

#include <functional>
#include <span>
#include <vector>

namespace polylab::stats {

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_err = 0.0;   // of the mean
  std::size_t count = 0;
};

Summary summarize(std::span<const double> samples);

// Standard error of the unbiased sample variance under a Gaussian model.
double variance_std_err(double variance, std::size_t count);

double normal_cdf(double x);

// Two-sided one-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Asymptotic p-value of the KS statistic for a sample of size n.
double ks_p_value(double statistic, std::size_t n);

double median(std::vector<double> samples);

// Large-sample standard error of the median, sqrt(pi/2) * sd / sqrt(n).
double median_std_err(std::span<const double> samples);

double correlation(std::span<const double> x, std::span<const double> y);

}  // namespace polylab::stats
