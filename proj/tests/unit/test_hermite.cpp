#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "polylab/error.hpp"
#include "polylab/hermite.hpp"
#include "support.hpp"

using namespace polylab;

namespace {

std::vector<MultiIndex> all_indices(int dim, int max_order) {
  std::vector<MultiIndex> out;
  std::vector<int> n(dim, 0);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dim) {
      out.emplace_back(n);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      n[axis] = v;
      rec(axis + 1, left - v);
    }
    n[axis] = 0;
  };
  rec(0, max_order);
  return out;
}

// T^{m/2} He_m(x / sqrt T) = sum_k (-1)^k m! / (k! (m-2k)! 2^k) x^{m-2k} T^k.
std::int64_t univariate(int m, int k) {
  std::int64_t num = 1;
  for (int i = 2; i <= m; ++i) num *= i;
  std::int64_t den = 1;
  for (int i = 2; i <= k; ++i) den *= i;
  for (int i = 2; i <= m - 2 * k; ++i) den *= i;
  den <<= k;
  return (k % 2 ? -1 : 1) * (num / den);
}

}  // namespace

TEST(Hermite, LowOrderTables) {
  const auto i2 = hermite_coeffs(MultiIndex({2}));
  ASSERT_EQ(i2.terms.size(), 2u);
  EXPECT_EQ(i2.terms.at(MonomialKey{{2}, 0}), 1);
  EXPECT_EQ(i2.terms.at(MonomialKey{{0}, 1}), -1);
  const auto i3 = hermite_coeffs(MultiIndex({3}));
  EXPECT_EQ(i3.terms.at(MonomialKey{{1}, 1}), -3);
  const auto mixed = hermite_coeffs(MultiIndex({1, 1}));
  ASSERT_EQ(mixed.terms.size(), 1u);
  EXPECT_EQ(mixed.terms.at(MonomialKey{{1, 1}, 0}), 1);
  const auto zero = hermite_coeffs(MultiIndex({0, 0, 0}));
  ASSERT_EQ(zero.terms.size(), 1u);
}

TEST(Hermite, CoefficientsAreProductsOfUnivariateOnes) {
  for (const auto& n : all_indices(3, 6)) {
    const auto coeffs = hermite_coeffs(n);
    std::size_t expected_terms = 1;
    for (int v : n.n) expected_terms *= static_cast<std::size_t>(v / 2 + 1);
    ASSERT_EQ(coeffs.terms.size(), expected_terms);
    for (const auto& [key, c] : coeffs.terms) {
      std::int64_t product = 1;
      int j = 0;
      for (int a = 0; a < 3; ++a) {
        const int k = (n.n[a] - key.powers[a]) / 2;
        ASSERT_EQ(n.n[a] - key.powers[a], 2 * k);
        product *= univariate(n.n[a], k);
        j += k;
      }
      EXPECT_EQ(key.t_power, j);
      EXPECT_EQ(c, product);
    }
  }
}

TEST(Hermite, DegreeAndLeadingTermIdentities) {
  for (const auto& n : all_indices(3, 6)) {
    const auto coeffs = hermite_coeffs(n);
    for (const auto& [key, c] : coeffs.terms) {
      int degree = 2 * key.t_power;
      for (int p : key.powers) degree += p;
      EXPECT_EQ(degree, n.order());
      if (key.t_power == 0) {
        EXPECT_EQ(key.powers, n.n);
        EXPECT_EQ(c, 1);
      }
    }
  }
}

TEST(Hermite, DualEvaluationRoutesAgree) {
  const auto coeffs = hermite_coeffs(MultiIndex({3, 0, 2}));
  for (double T : {0.5, 4.0, 64.0}) {
    const std::array<double, 3> x{1.3, -0.4, 2.2};
    const double a = i_n(coeffs, T, x);
    const double b = i_n_hermite_product(coeffs.n, T, x);
    EXPECT_NEAR(a, b, 1e-12 * i_n_magnitude(coeffs, T, x));
  }
}

TEST(Hermite, HeRecurrence) {
  EXPECT_EQ(hermite_he(0, 0.7), 1.0);
  EXPECT_EQ(hermite_he(1, 0.7), 0.7);
  EXPECT_NEAR(hermite_he(4, 0.7), std::pow(0.7, 4) - 6 * 0.49 + 3, 1e-14);
}

TEST(Hermite, GaussianMoments) {
  EXPECT_EQ(normal_moment(0), 1);
  EXPECT_EQ(normal_moment(5), 0);
  EXPECT_EQ(normal_moment(8), 105);
  for (int k = 0; k <= 5; ++k) EXPECT_EQ(normal_moment(2 * k + 2), (2 * k + 1) * normal_moment(2 * k));
  EXPECT_EQ(gaussian_moment(MultiIndex({2, 4, 0})), 3.0);
}

TEST(Hermite, ExpectationUnderGaussianVanishes) {
  for (const auto& n : all_indices(3, 6)) {
    const auto coeffs = hermite_coeffs(n);
    if (n.order() == 0) {
      EXPECT_EQ(expected_in_under_gaussian(coeffs, 2.0), 1.0);
    } else {
      EXPECT_EQ(gaussian_expectation_numerator(coeffs), 0) << n.order();
      EXPECT_EQ(expected_in_under_gaussian(coeffs, 7.5), 0.0);
    }
  }
}

TEST(Hermite, OrderCapAndValidation) {
  EXPECT_THROW(hermite_coeffs(MultiIndex({7, 6, 0})), InvalidArgument);
  EXPECT_THROW(MultiIndex({1, -1}), InvalidArgument);
  EXPECT_THROW(MultiIndex(std::vector<int>{}), InvalidArgument);
  EXPECT_NO_THROW(hermite_coeffs(MultiIndex({kMaxHermiteOrder})));
}

TEST(Hermite, YnAtZeroBetaIsCentred) {
  const auto& spec = fixtures::unit_bump3();
  const auto field = make_noise_field(5, 0.05, 0.25, 3);
  const auto est = y_n_estimate(field, spec, 0.0, 1.0, 0.05, seed_range(0, 400), MultiIndex({2, 0, 0}));
  EXPECT_NEAR(est.value, 0.0, 4.0 * est.std_err);
  EXPECT_GT(est.std_err, 0.0);
  // Odd n cancels between antithetic twins.
  const auto odd = y_n_estimate(field, spec, 0.0, 1.0, 0.05, seed_range(0, 400), MultiIndex({1, 0, 0}));
  EXPECT_EQ(odd.value, 0.0);
}

TEST(Hermite, DecayCurveMatchesSingleEstimates) {
  const auto& spec = fixtures::unit_bump3();
  const auto field = make_noise_field(5, 0.05, 0.25, 3);
  const auto seeds = seed_range(0, 40);
  const std::vector<double> horizons{0.5, 1.0};
  const auto curve = y_n_decay_curve(field, spec, 0.6, 0.05, seeds, MultiIndex({1, 0, 0}), horizons);
  ASSERT_EQ(curve.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto single = y_n_estimate(field, spec, 0.6, horizons[i], 0.05, seeds, MultiIndex({1, 0, 0}));
    EXPECT_NEAR(curve[i].scaled, single.value / std::sqrt(horizons[i]), 1e-13);
  }
}
