#include "dpinfer/smoothing.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

namespace dpinfer {
namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

// Direct, unshifted LogSumExp at 50 digits.
double big_rsmax(const std::vector<double>& a, double alpha) {
  Big sum = 0;
  for (double v : a) sum += boost::multiprecision::exp(Big(alpha) * Big(v));
  return static_cast<double>(boost::multiprecision::log(sum) / Big(alpha));
}

double big_rsmin(const std::vector<double>& a, double alpha) {
  Big sum = 0;
  for (double v : a) sum += boost::multiprecision::exp(-Big(alpha) * Big(v));
  return static_cast<double>(-boost::multiprecision::log(sum) / Big(alpha));
}

std::vector<double> central_gradient(double (*f)(std::span<const double>, Alpha),
                                     std::vector<double> a, Alpha alpha, double h) {
  std::vector<double> grad(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    a[i] = x + h;
    const double up = f(a, alpha);
    a[i] = x - h;
    const double down = f(a, alpha);
    a[i] = x;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> random_rates(std::mt19937_64& rng, std::size_t g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(g);
  for (auto& v : a) v = u(rng);
  return a;
}

TEST(Rsmax, SingleEntryIsExact) {
  const std::vector<double> a{0.5};
  for (double alpha : {1e-3, 1.0, 10.0, 1e9}) EXPECT_EQ(rsmax(a, Alpha(alpha)), 0.5);
}

TEST(Rsmax, EqualEntriesAddLogGOverAlpha) {
  const std::vector<double> a{0.5, 0.5};
  EXPECT_NEAR(rsmax(a, Alpha(10)), 0.5 + std::log(2.0) / 10.0, 1e-15);
  EXPECT_NEAR(rsmax(a, Alpha(10)), 0.5693147180559945, 1e-15);
}

TEST(Rsmax, MatchesHighPrecisionClosedForm) {
  const std::vector<double> a{0.10, 0.05};
  // 0.1 + 0.1 ln(1 + e^-0.5), evaluated at 40 digits.
  constexpr double frozen = 0.14740769841801066808729973550811707;
  EXPECT_NEAR(rsmax(a, Alpha(10)), frozen, 1e-15);
  EXPECT_NEAR(big_rsmax(a, 10), frozen, 1e-16);
}

TEST(Rsmin, MirrorsRsmax) {
  EXPECT_EQ(rsmin(std::vector<double>{0.5}, Alpha(3)), 0.5);
  EXPECT_NEAR(rsmin(std::vector<double>{0.5, 0.5}, Alpha(10)), 0.5 - std::log(2.0) / 10.0, 1e-15);
  constexpr double frozen = 0.0025923015819893319127002644918829250;
  EXPECT_NEAR(rsmin(std::vector<double>{0.10, 0.05}, Alpha(10)), frozen, 1e-15);
  EXPECT_NEAR(big_rsmin({0.10, 0.05}, 10), frozen, 1e-16);
}

TEST(Smoothing, RejectsInvalidInput) {
  EXPECT_THROW(Alpha(0.0), Error);
  EXPECT_THROW(Alpha(-1.0), Error);
  EXPECT_THROW(Alpha(std::numeric_limits<double>::infinity()), Error);
  EXPECT_THROW(Alpha(std::nan("")), Error);
  const std::vector<double> empty;
  EXPECT_THROW(rsmax(empty, Alpha(1)), Error);
  EXPECT_THROW(softmin(empty, Alpha(1)), Error);
  const std::vector<double> bad{0.1, std::nan("")};
  EXPECT_THROW(rsmin(bad, Alpha(1)), Error);
  EXPECT_THROW(softmax_jacobian(bad, Alpha(1)), Error);
  try {
    rsmax(empty, Alpha(1));
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(Softmax, SymmetricInputGivesUniformWeights) {
  const auto w = softmax(std::vector<double>{0.3, 0.3, 0.3}, Alpha(7));
  for (double v : w) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  const auto m = softmin(std::vector<double>{0.3, 0.3}, Alpha(7));
  EXPECT_DOUBLE_EQ(m[0], 0.5);
  EXPECT_DOUBLE_EQ(m[1], 0.5);
}

TEST(Softmax, ConcentratesOnUniqueExtreme) {
  const auto w = softmax(std::vector<double>{1.0, 0.0}, Alpha(1e4));
  EXPECT_NEAR(w[0], 1.0, 1e-10);
  EXPECT_NEAR(w[1], 0.0, 1e-10);
  const auto m = softmin(std::vector<double>{0.0, 1.0}, Alpha(1e4));
  EXPECT_NEAR(m[0], 1.0, 1e-10);
  EXPECT_NEAR(m[1], 0.0, 1e-10);
}

TEST(Softmax, MatchesFiniteDifferenceGradient) {
  const std::vector<double> a{0.10, 0.05};
  const auto w = softmax(a, Alpha(10));
  const auto fd = central_gradient(rsmax, a, Alpha(10), 1e-6);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(w[i], fd[i], 1e-6);

  const auto m = softmin(a, Alpha(20));
  const auto fdm = central_gradient(rsmin, a, Alpha(20), 1e-6);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(m[i], fdm[i], 1e-6);
}

TEST(SoftmaxJacobian, EqualPairPattern) {
  for (double alpha : {1.0, 10.0, 250.0}) {
    const auto j = softmax_jacobian(std::vector<double>{0.2, 0.2}, Alpha(alpha));
    EXPECT_NEAR(j(0, 0), alpha / 4.0, 1e-12 * alpha);
    EXPECT_NEAR(j(1, 1), alpha / 4.0, 1e-12 * alpha);
    EXPECT_NEAR(j(0, 1), -alpha / 4.0, 1e-12 * alpha);
    EXPECT_NEAR(j(1, 0), -alpha / 4.0, 1e-12 * alpha);
  }
}

TEST(SoftmaxJacobian, MatchesFiniteDifferenceOfSoftmax) {
  const std::vector<double> a{0.10, 0.05};
  const Alpha alpha(10);
  const auto jac = softmax_jacobian(a, alpha);
  const double h = 1e-6;
  for (std::size_t j = 0; j < a.size(); ++j) {
    auto up = a, down = a;
    up[j] += h;
    down[j] -= h;
    const auto su = softmax(up, alpha);
    const auto sd = softmax(down, alpha);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(jac(i, j), (su[i] - sd[i]) / (2.0 * h), 1e-4 * alpha.value());
    }
  }
}

TEST(SoftmaxJacobian, SymmetricWithZeroRowSums) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_rates(rng, 1 + trial % 8);
    const Alpha alpha(trial % 2 ? 3.0 : 300.0);
    const auto jac = softmax_jacobian(a, alpha);
    for (std::size_t i = 0; i < a.size(); ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) {
        EXPECT_NEAR(jac(i, j), jac(j, i), 1e-12 * alpha.value());
        row += jac(i, j);
        col += jac(j, i);
      }
      EXPECT_NEAR(row, 0.0, 1e-10 * alpha.value());
      EXPECT_NEAR(col, 0.0, 1e-10 * alpha.value());
    }
  }
}

TEST(SmoothingProperties, BoundsAndNormalization) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t g = 1 + trial % 8;
    const auto a = random_rates(rng, g);
    const double hi = *std::max_element(a.begin(), a.end());
    const double lo = *std::min_element(a.begin(), a.end());
    for (double alpha : {1.0, 10.0, 100.0, 1e6}) {
      const double gap = std::log(static_cast<double>(g)) / alpha;
      const double mx = rsmax(a, Alpha(alpha));
      const double mn = rsmin(a, Alpha(alpha));
      EXPECT_GE(mx, hi);
      EXPECT_LE(mx, hi + gap + 1e-15);
      EXPECT_LE(mn, lo);
      EXPECT_GE(mn, lo - gap - 1e-15);
      const auto w = softmax(a, Alpha(alpha));
      const auto m = softmin(a, Alpha(alpha));
      EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
      EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-12);
      for (double v : w) EXPECT_GE(v, 0.0);
    }
  }
}

TEST(SmoothingProperties, ShiftEquivariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-1e6, 1e6);
  for (int trial = 0; trial < 500; ++trial) {
    auto a = random_rates(rng, 2 + trial % 6);
    const double c = trial == 0 ? 1e6 : shift(rng);
    const Alpha alpha(trial % 3 == 0 ? 1.0 : 50.0);
    const double base = rsmax(a, alpha);
    for (auto& v : a) v += c;
    // Adding c to O(1) entries rounds at the scale of ulp(c).
    const double tol = 1e-12 + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(c);
    EXPECT_NEAR(rsmax(a, alpha), base + c, tol);
  }
}

TEST(SmoothingProperties, DecreasesTowardMaxAsAlphaGrows) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_rates(rng, 2 + trial % 7);
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {1.0, 10.0, 100.0, 1000.0}) {
      const double v = rsmax(a, Alpha(alpha));
      // At large alpha the correction can round to exactly zero.
      if (alpha <= 10.0) {
        EXPECT_LT(v, prev);
      } else {
        EXPECT_LE(v, prev);
      }
      prev = v;
    }
  }
}

TEST(SmoothingProperties, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t g = 1 + trial % 8;
    const auto a = random_rates(rng, g);
    for (double alpha : {1.0, 10.0, 100.0}) {
      const double h = 1e-5 / alpha;
      const auto w = softmax(a, Alpha(alpha));
      const auto fd = central_gradient(rsmax, a, Alpha(alpha), h);
      const auto m = softmin(a, Alpha(alpha));
      const auto fdm = central_gradient(rsmin, a, Alpha(alpha), h);
      for (std::size_t i = 0; i < g; ++i) {
        EXPECT_NEAR(w[i], fd[i], 1e-5 * std::max(std::abs(w[i]), 1e-3));
        EXPECT_NEAR(m[i], fdm[i], 1e-5 * std::max(std::abs(m[i]), 1e-3));
      }
    }
  }
}

TEST(SmoothingProperties, HugeAlphaStaysFinite) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_rates(rng, 1 + trial % 8);
    const Alpha alpha(1e9);
    EXPECT_TRUE(std::isfinite(rsmax(a, alpha)));
    EXPECT_TRUE(std::isfinite(rsmin(a, alpha)));
    for (double v : softmax(a, alpha)) EXPECT_TRUE(std::isfinite(v));
    for (double v : softmin(a, alpha)) EXPECT_TRUE(std::isfinite(v));
  }
  const std::vector<double> wide{-1e6, 1e6, 0.0};
  EXPECT_EQ(rsmax(wide, Alpha(1e9)), 1e6);
  EXPECT_EQ(rsmin(wide, Alpha(1e9)), -1e6);
}

TEST(Smoothing, TiedMaximaAreOrderInvariant) {
  const std::vector<double> a{0.4, 0.1, 0.4, 0.2};
  const std::vector<double> b{0.1, 0.4, 0.2, 0.4};
  EXPECT_EQ(rsmax(a, Alpha(30)), rsmax(std::vector<double>{0.4, 0.4, 0.1, 0.2}, Alpha(30)));
  EXPECT_NEAR(rsmax(a, Alpha(30)), rsmax(b, Alpha(30)), 1e-16);
  const auto w = softmax(a, Alpha(30));
  EXPECT_DOUBLE_EQ(w[0], w[2]);
}

TEST(Smoothing, HardWeightsSplitTies) {
  const auto w = hard_min_weights(std::vector<double>{0.2, 0.1, 0.1});
  EXPECT_EQ(w, (std::vector<double>{0.0, 0.5, 0.5}));
  const auto m = hard_max_weights(std::vector<double>{0.2, 0.1, 0.1});
  EXPECT_EQ(m, (std::vector<double>{1.0, 0.0, 0.0}));
}

}  // namespace
}  // namespace dpinfer
