#ifndef DPINFER_SMOOTHING_HPP
#define DPINFER_SMOOTHING_HPP

// LogSumExp smooth extremes.
//
//   rsmax_a(x) = max(x) + (1/a) log( sum_g exp(a (x_g - max(x))) )
//   rsmin_a(x) = -rsmax_a(-x)
//
// softmax/softmin are the gradients, softmax_jacobian the Hessian of rsmax.
// Every exponent is shifted by the largest entry so exp() never sees a
// positive argument; rsmax stays finite for any finite input and alpha.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dpinfer/error.hpp"
#include "dpinfer/matrix.hpp"

namespace dpinfer {

/// Smoothing sharpness. Larger values track the true max/min more closely.
class Alpha {
 public:
  explicit Alpha(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      fail(ErrorKind::invalid_input,
           "alpha must be positive and finite, got " + format_number(value));
    }
  }

  double value() const noexcept { return value_; }

 private:
  double value_;
};

namespace detail {

inline void check_inputs(std::span<const double> a) {
  if (a.empty()) fail(ErrorKind::invalid_input, "smoothing input is empty");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) {
      fail(ErrorKind::invalid_input,
           "smoothing input entry " + std::to_string(i) + " is not finite");
    }
  }
}

inline std::vector<double> negated(std::span<const double> a) {
  std::vector<double> out(a.size());
  std::transform(a.begin(), a.end(), out.begin(), [](double v) { return -v; });
  return out;
}

// Shifted weights exp(alpha (a_g - max)) in index order, plus their sum.
inline double shifted_weights(std::span<const double> a, double alpha,
                              std::vector<double>& w) {
  const double top = *std::max_element(a.begin(), a.end());
  w.resize(a.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    w[i] = std::exp(alpha * (a[i] - top));
    total += w[i];
  }
  return total;
}

}  // namespace detail

inline double rsmax(std::span<const double> a, Alpha alpha) {
  detail::check_inputs(a);
  const double top = *std::max_element(a.begin(), a.end());
  double total = 0.0;
  for (double v : a) total += std::exp(alpha.value() * (v - top));
  return top + std::log(total) / alpha.value();
}

inline std::vector<double> softmax(std::span<const double> a, Alpha alpha) {
  detail::check_inputs(a);
  std::vector<double> w;
  const double total = detail::shifted_weights(a, alpha.value(), w);
  for (double& v : w) v /= total;
  return w;
}

inline double rsmin(std::span<const double> a, Alpha alpha) {
  detail::check_inputs(a);
  const auto neg = detail::negated(a);
  return -rsmax(neg, alpha);
}

inline std::vector<double> softmin(std::span<const double> a, Alpha alpha) {
  detail::check_inputs(a);
  const auto neg = detail::negated(a);
  return softmax(neg, alpha);
}

/// Hessian of rsmax: alpha * S_i * (delta_ij - S_j).
inline Matrix softmax_jacobian(std::span<const double> a, Alpha alpha) {
  const auto s = softmax(a, alpha);
  const std::size_t g = s.size();
  Matrix jac(g, g);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      const double delta = (i == j) ? 1.0 : 0.0;
      jac(i, j) = alpha.value() * s[i] * (delta - s[j]);
    }
  }
  return jac;
}

/// Weights of the alpha -> infinity limit: equal mass on every entry tied at
/// the extreme, zero elsewhere.
inline std::vector<double> hard_max_weights(std::span<const double> a) {
  detail::check_inputs(a);
  const double top = *std::max_element(a.begin(), a.end());
  const auto ties = static_cast<double>(std::count(a.begin(), a.end(), top));
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) w[i] = (a[i] == top) ? 1.0 / ties : 0.0;
  return w;
}

inline std::vector<double> hard_min_weights(std::span<const double> a) {
  const auto neg = detail::negated(a);
  return hard_max_weights(neg);
}

}  // namespace dpinfer

#endif  // DPINFER_SMOOTHING_HPP
