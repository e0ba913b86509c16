#pragma once

#include <algorithm>
#include <cmath>

#include "polylab/error.hpp"
#include "polylab/parallel.hpp"

namespace polylab {

template <class Fn>
Estimate weighted_mean(const WeightedEnsemble& ens, Fn&& f) {
  const std::size_t n = ens.size();
  if (n == 0) throw InvalidArgument("weighted mean of an empty ensemble");
  const double top = *std::max_element(ens.log_weights.begin(), ens.log_weights.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(ens.log_weights[i] - top);

  const std::size_t chunk = ens.reduction_chunk;
  const double sum_w = twin_sum(n, chunk, [&](std::size_t i) { return w[i]; });
  const double sum_wf = twin_sum(n, chunk, [&](std::size_t i) { return w[i] * f(i); });
  const double mean = sum_wf / sum_w;
  const double spread = twin_sum(n, chunk, [&](std::size_t i) {
    const double dev = f(i) - mean;
    return w[i] * w[i] * dev * dev;
  });
  return {mean, std::sqrt(spread) / sum_w};
}

}  // namespace polylab
