#ifndef DPINFER_PROPAGATION_HPP
#define DPINFER_PROPAGATION_HPP

// Delta-method propagation from per-group rates to the DP ratio.
//
// Stage 1: h(s) = (rsmin(s), rsmax(s)). Its Jacobian has rows softmin(s) and
// softmax(s), so Cov_h = J diag(sigma2) J^T (2 x 2).
// Stage 2: DP = a / b with gradient [1/b, -a/b^2]; var_DP = g^T Cov_h g.
//
// All variances are on the sqrt(N) scale; the standard error of the DP
// estimate is sqrt(var_DP / N).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpinfer/data_model.hpp"
#include "dpinfer/error.hpp"
#include "dpinfer/matrix.hpp"
#include "dpinfer/smoothing.hpp"

namespace dpinfer {

/// Either a fixed alpha, or the sample-size rule alpha = c * N^q with q < 1/2.
class SmoothingConfig {
 public:
  enum class Mode { fixed, rule };

  static SmoothingConfig fixed(double alpha) {
    Alpha checked(alpha);
    SmoothingConfig cfg;
    cfg.mode_ = Mode::fixed;
    cfg.alpha_ = checked.value();
    return cfg;
  }

  static SmoothingConfig rule(double c, double q) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      fail(ErrorKind::invalid_input, "alpha rule: c must be positive and finite");
    }
    if (!(q > 0.0 && q < 0.5)) {
      fail(ErrorKind::invalid_input, "alpha rule: q must lie strictly inside (0, 1/2)");
    }
    SmoothingConfig cfg;
    cfg.mode_ = Mode::rule;
    cfg.c_ = c;
    cfg.q_ = q;
    return cfg;
  }

  /// alpha = N^0.4, inside the normality regime with some margin.
  static SmoothingConfig default_rule() { return rule(1.0, 0.4); }

  Mode mode() const noexcept { return mode_; }
  double fixed_alpha() const noexcept { return alpha_; }
  double c() const noexcept { return c_; }
  double q() const noexcept { return q_; }

 private:
  SmoothingConfig() = default;

  Mode mode_ = Mode::rule;
  double alpha_ = 0.0;
  double c_ = 1.0;
  double q_ = 0.4;
};

struct AlphaResolution {
  Alpha alpha;
  Diagnostics diagnostics;
};

inline AlphaResolution resolve_alpha(const SmoothingConfig& config, std::uint64_t n) {
  if (n == 0) fail(ErrorKind::invalid_input, "resolve_alpha: n must be at least 1");
  const double root_n = std::sqrt(static_cast<double>(n));
  if (config.mode() == SmoothingConfig::Mode::rule) {
    return {Alpha(config.c() * std::pow(static_cast<double>(n), config.q())), {}};
  }
  AlphaResolution out{Alpha(config.fixed_alpha()), {}};
  if (config.fixed_alpha() >= root_n) {
    out.diagnostics.push_back(
        {"alpha_at_or_above_sqrt_n",
         "fixed alpha " + format_number(config.fixed_alpha()) + " is at or above sqrt(N) = " +
             format_number(root_n) + "; normality of the estimate is not guaranteed when "
             "group rates are tied"});
  }
  return out;
}

enum class Estimand { smooth, raw };

inline const char* to_string(Estimand e) { return e == Estimand::smooth ? "smooth" : "raw"; }

/// (min, max) summary with its delta-method covariance. alpha_used is empty
/// for the hard min/max.
struct SmoothedExtremes {
  double min_value = 0.0;
  double max_value = 0.0;
  Matrix cov{2, 2};
  std::optional<double> alpha_used;
  std::vector<double> min_weights;
  std::vector<double> max_weights;
  std::uint64_t n = 0;
  double max_group_variance = 0.0;
};

struct DpEstimate {
  double dp = 0.0;
  double variance = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
  std::optional<double> alpha_used;
  Estimand estimand = Estimand::smooth;
  double min_value = 0.0;
  double max_value = 0.0;
  Diagnostics diagnostics;
};

namespace detail {

inline void check_means(const MeansWithCovariance& m) {
  if (m.s_hat.size() != m.sigma2.size() || m.s_hat.size() != m.p_hat.size()) {
    fail(ErrorKind::invalid_input, "rates, shares and variances differ in length");
  }
  if (m.n == 0) fail(ErrorKind::invalid_input, "sample size must be at least 1");
}

// cov = J diag(sigma2) J^T with J rows (w_min, w_max).
inline Matrix extremes_covariance(std::span<const double> w_min, std::span<const double> w_max,
                                  std::span<const double> sigma2) {
  Matrix cov(2, 2);
  double mm = 0.0, mx = 0.0, xx = 0.0;
  for (std::size_t g = 0; g < sigma2.size(); ++g) {
    mm += w_min[g] * w_min[g] * sigma2[g];
    mx += w_min[g] * w_max[g] * sigma2[g];
    xx += w_max[g] * w_max[g] * sigma2[g];
  }
  cov(0, 0) = mm;
  cov(0, 1) = mx;
  cov(1, 0) = mx;
  cov(1, 1) = xx;
  return cov;
}

inline SmoothedExtremes assemble(const MeansWithCovariance& m, double min_value,
                                 double max_value, std::vector<double> w_min,
                                 std::vector<double> w_max, std::optional<double> alpha) {
  SmoothedExtremes e;
  e.min_value = min_value;
  e.max_value = max_value;
  e.cov = extremes_covariance(w_min, w_max, m.sigma2);
  e.alpha_used = alpha;
  e.min_weights = std::move(w_min);
  e.max_weights = std::move(w_max);
  e.n = m.n;
  e.max_group_variance = m.sigma2.empty() ? 0.0 : *std::max_element(m.sigma2.begin(),
                                                                     m.sigma2.end());
  return e;
}

}  // namespace detail

inline SmoothedExtremes smoothed_extremes(const MeansWithCovariance& m, Alpha alpha) {
  detail::check_means(m);
  if (m.size() < 2) {
    fail(ErrorKind::invalid_input, "DP inference needs at least two groups");
  }
  return detail::assemble(m, rsmin(m.s_hat, alpha), rsmax(m.s_hat, alpha),
                          softmin(m.s_hat, alpha), softmax(m.s_hat, alpha), alpha.value());
}

/// Hard min/max with the limiting gradient convention: equal weight on ties.
inline SmoothedExtremes hard_extremes(const MeansWithCovariance& m) {
  detail::check_means(m);
  if (m.size() < 2) {
    fail(ErrorKind::invalid_input, "DP inference needs at least two groups");
  }
  const auto [lo, hi] = std::minmax_element(m.s_hat.begin(), m.s_hat.end());
  return detail::assemble(m, *lo, *hi, hard_min_weights(m.s_hat), hard_max_weights(m.s_hat),
                          std::nullopt);
}

inline DpEstimate dp_point_and_variance(const SmoothedExtremes& e) {
  const double a = e.min_value;
  const double b = e.max_value;
  if (!(b > 0.0)) {
    fail(ErrorKind::undefined_dp, "DP is undefined: all-zero success rates (max is not positive)");
  }
  // -(a / b) / b cancels 1 / b exactly when a == b.
  const std::array<double, 2> grad{1.0 / b, -(a / b) / b};
  double variance = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) variance += grad[i] * e.cov(i, j) * grad[j];
  }

  DpEstimate est;
  est.dp = a / b;
  est.n = e.n;
  est.alpha_used = e.alpha_used;
  est.estimand = e.alpha_used ? Estimand::smooth : Estimand::raw;
  est.min_value = a;
  est.max_value = b;
  if (variance < 0.0) {
    est.diagnostics.push_back({"negative_variance_clamped",
                               "delta-method variance " + format_number(variance) +
                                   " was negative from rounding and is clamped to 0"});
    variance = 0.0;
  }
  est.variance = variance;
  est.se = std::sqrt(variance / static_cast<double>(e.n));
  if (variance < 1e-3 * e.max_group_variance) {
    est.diagnostics.push_back(
        {"degenerate_normality",
         "DP variance is below 1e-3 of the largest group variance; the rates are "
         "(nearly) tied and normal-theory inference is unreliable"});
  }
  return est;
}

inline DpEstimate dp_raw(const MeansWithCovariance& m) {
  detail::check_means(m);
  if (m.size() < 2) {
    fail(ErrorKind::invalid_input, "DP inference needs at least two groups");
  }
  if (!(*std::max_element(m.s_hat.begin(), m.s_hat.end()) > 0.0)) {
    fail(ErrorKind::undefined_dp, "DP is undefined: every group has a zero success rate");
  }
  return dp_point_and_variance(hard_extremes(m));
}

/// Range that the smooth ratio rsmin/rsmax must fall in, given only the hard
/// extremes: max <= rsmax <= max + ln(G)/alpha, min - ln(G)/alpha <= rsmin <= min.
inline std::pair<double, double> smooth_dp_bounds(double hard_min, double hard_max,
                                                  std::size_t groups, Alpha alpha) {
  const double gap = std::log(static_cast<double>(groups)) / alpha.value();
  const std::array<double, 4> corners{hard_min / hard_max, hard_min / (hard_max + gap),
                                      (hard_min - gap) / hard_max,
                                      (hard_min - gap) / (hard_max + gap)};
  return {*std::min_element(corners.begin(), corners.end()),
          *std::max_element(corners.begin(), corners.end())};
}

/// Full pipeline from rates to a DP estimate for the chosen estimand.
inline DpEstimate estimate_dp(const MeansWithCovariance& m, const SmoothingConfig& config,
                              Estimand estimand = Estimand::smooth) {
  detail::check_means(m);
  if (m.size() < 2) {
    fail(ErrorKind::invalid_input, "DP inference needs at least two groups");
  }
  if (!(*std::max_element(m.s_hat.begin(), m.s_hat.end()) > 0.0)) {
    fail(ErrorKind::undefined_dp, "DP is undefined: every group has a zero success rate");
  }
  DpEstimate est;
  Diagnostics pre = m.diagnostics;
  if (estimand == Estimand::raw) {
    est = dp_raw(m);
  } else {
    auto resolved = resolve_alpha(config, m.n);
    append(pre, resolved.diagnostics);
    est = dp_point_and_variance(smoothed_extremes(m, resolved.alpha));
  }
  pre.insert(pre.end(), est.diagnostics.begin(), est.diagnostics.end());
  est.diagnostics = std::move(pre);
  return est;
}

}  // namespace dpinfer

#endif  // DPINFER_PROPAGATION_HPP
