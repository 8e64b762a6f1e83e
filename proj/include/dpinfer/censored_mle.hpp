#ifndef DPINFER_CENSORED_MLE_HPP
#define DPINFER_CENSORED_MLE_HPP

// Per-group MLE when each member files N_i applications and we only observe
// Y_i = 1{at least one succeeded}, so Y_i ~ Bernoulli(1 - (1 - s)^N_i):
//
//   l(s) = sum_i Y_i log(1 - (1-s)^N_i) + (1 - Y_i) N_i log(1 - s)
//
// With u = 1 - s:
//   l'(s)  = sum_i Y_i N_i u^(N_i-1) / (1 - u^N_i) - (1 - Y_i) N_i / u
//   l''(s) = -sum_i Y_i N_i u^(N_i-2) (N_i - 1 + u^N_i) / (1 - u^N_i)^2
//                   + (1 - Y_i) N_i / u^2
// l'' < 0 on (0, 1), so the score is strictly decreasing and has at most one
// root.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpinfer/data_model.hpp"
#include "dpinfer/error.hpp"
#include "dpinfer/propagation.hpp"

namespace dpinfer {

enum class MleBoundary { none, lower, upper };

inline const char* to_string(MleBoundary b) {
  switch (b) {
    case MleBoundary::none: return "none";
    case MleBoundary::lower: return "lower";
    case MleBoundary::upper: return "upper";
  }
  return "unknown";
}

struct MleResult {
  std::string label;
  double s_hat = 0.0;
  /// NaN when the fit is boundary-flagged.
  double se = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  MleBoundary boundary = MleBoundary::none;
  std::uint64_t records = 0;
};

struct MleOptions {
  double epsilon = 1e-9;
  double score_tolerance = 1e-8;
  double bracket_tolerance = 1e-12;
  int max_iterations = 500;
};

namespace detail {

inline void check_censored(std::span<const CensoredRecord> data) {
  if (data.empty()) fail(ErrorKind::invalid_input, "censored fit needs at least one record");
  for (const auto& r : data) {
    if (r.applications == 0) {
      fail(ErrorKind::invalid_input, "censored record with zero applications");
    }
    if (r.hired != 0 && r.hired != 1) {
      fail(ErrorKind::invalid_input, "censored record with hired outside {0, 1}");
    }
  }
}

inline void check_open_unit(double s) {
  if (!(s > 0.0 && s < 1.0)) {
    fail(ErrorKind::domain, "censored likelihood needs s in (0, 1), got " + format_number(s));
  }
}

}  // namespace detail

inline double censored_loglik(double s, std::span<const CensoredRecord> data) {
  detail::check_open_unit(s);
  detail::check_censored(data);
  const double log_u = std::log1p(-s);
  double total = 0.0;
  for (const auto& r : data) {
    const double n = static_cast<double>(r.applications);
    if (r.hired == 1) {
      total += std::log(-std::expm1(n * log_u));
    } else {
      total += n * log_u;
    }
  }
  return total;
}

inline double censored_score(double s, std::span<const CensoredRecord> data) {
  detail::check_open_unit(s);
  detail::check_censored(data);
  const double log_u = std::log1p(-s);
  const double u = 1.0 - s;
  double total = 0.0;
  for (const auto& r : data) {
    const double n = static_cast<double>(r.applications);
    if (r.hired == 1) {
      total += n * std::exp((n - 1.0) * log_u) / -std::expm1(n * log_u);
    } else {
      total -= n / u;
    }
  }
  return total;
}

/// Second derivative of censored_loglik in s. Always negative.
inline double censored_hessian(double s, std::span<const CensoredRecord> data) {
  detail::check_open_unit(s);
  detail::check_censored(data);
  const double log_u = std::log1p(-s);
  const double u = 1.0 - s;
  double total = 0.0;
  for (const auto& r : data) {
    const double n = static_cast<double>(r.applications);
    if (r.hired == 1) {
      const double u_n = std::exp(n * log_u);
      const double denom = -std::expm1(n * log_u);
      total -= n * std::exp((n - 2.0) * log_u) * (n - 1.0 + u_n) / (denom * denom);
    } else {
      total -= n / (u * u);
    }
  }
  return total;
}

/// Maximizes the censored likelihood on [eps, 1 - eps] with a Newton step
/// kept inside a shrinking sign-change bracket of the score.
inline MleResult fit_censored(std::span<const CensoredRecord> data, std::string label = {},
                              const MleOptions& options = {}) {
  detail::check_censored(data);
  MleResult out;
  out.label = std::move(label);
  out.records = data.size();

  std::uint64_t hired = 0;
  for (const auto& r : data) hired += static_cast<std::uint64_t>(r.hired);
  const double lo_edge = options.epsilon;
  const double hi_edge = 1.0 - options.epsilon;

  if (hired == 0 || hired == data.size()) {
    out.boundary = hired == 0 ? MleBoundary::lower : MleBoundary::upper;
    out.s_hat = hired == 0 ? lo_edge : hi_edge;
    out.se = std::numeric_limits<double>::quiet_NaN();
    out.loglik = censored_loglik(out.s_hat, data);
    return out;
  }

  double lo = lo_edge;
  double hi = hi_edge;
  // Mixed outcomes: score > 0 near 0 and < 0 near 1. Start from the raw hire
  // rate, which is the exact answer when every N_i = 1.
  double x = std::clamp(static_cast<double>(hired) / static_cast<double>(data.size()), lo, hi);
  for (int it = 1; it <= options.max_iterations; ++it) {
    out.iterations = it;
    const double score = censored_score(x, data);
    if (std::abs(score) < options.score_tolerance) {
      out.converged = true;
      break;
    }
    if (score > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo < options.bracket_tolerance) {
      out.converged = true;
      break;
    }
    const double next = x - score / censored_hessian(x, data);
    if (next > lo && next < hi) {
      // A Newton step below rounding resolution means the score cannot get
      // any closer to zero in double precision.
      if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
        out.converged = true;
        break;
      }
      x = next;
    } else {
      x = 0.5 * (lo + hi);
    }
  }

  out.s_hat = x;
  out.loglik = censored_loglik(x, data);
  out.se = 1.0 / std::sqrt(-censored_hessian(x, data));
  return out;
}

/// Splits records by group (first-appearance order) and fits each.
inline std::vector<MleResult> fit_censored_groups(std::span<const CensoredRecord> records,
                                                  const MleOptions& options = {}) {
  detail::check_censored(records);
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<CensoredRecord>> by_group;
  for (const auto& r : records) {
    if (r.group.empty()) fail(ErrorKind::invalid_input, "censored record with empty group");
    auto [it, inserted] = by_group.try_emplace(r.group);
    if (inserted) order.push_back(r.group);
    it->second.push_back(r);
  }
  std::vector<MleResult> fits;
  fits.reserve(order.size());
  for (const auto& label : order) fits.push_back(fit_censored(by_group[label], label, options));
  return fits;
}

/// Feeds per-group MLEs into the standard propagation. sigma2_g = n * se_g^2
/// puts each group's variance on the sqrt(N) scale.
inline MeansWithCovariance censored_means(std::span<const MleResult> fits,
                                          std::span<const double> shares, std::uint64_t n) {
  if (fits.size() != shares.size()) {
    fail(ErrorKind::invalid_input, "one share per fitted group is required");
  }
  if (n == 0) fail(ErrorKind::invalid_input, "sample size must be at least 1");
  MeansWithCovariance m;
  m.n = n;
  for (std::size_t g = 0; g < fits.size(); ++g) {
    const auto& f = fits[g];
    if (f.boundary != MleBoundary::none) {
      fail(ErrorKind::inference_unavailable,
           "group '" + f.label + "' has a boundary MLE (all outcomes " +
               (f.boundary == MleBoundary::lower ? "0" : "1") + "); DP inference unavailable");
    }
    if (!f.converged) {
      fail(ErrorKind::inference_unavailable,
           "group '" + f.label + "' MLE did not converge; DP inference unavailable");
    }
    m.labels.push_back(f.label);
    m.s_hat.push_back(f.s_hat);
    m.p_hat.push_back(shares[g]);
    m.sigma2.push_back(static_cast<double>(n) * f.se * f.se);
  }
  return m;
}

inline DpEstimate dp_from_censored(std::span<const MleResult> fits,
                                   std::span<const double> shares, std::uint64_t n,
                                   const SmoothingConfig& config = SmoothingConfig::default_rule(),
                                   Estimand estimand = Estimand::smooth) {
  return estimate_dp(censored_means(fits, shares, n), config, estimand);
}

/// Shares p_g = records_g / total, matching the fit order.
inline std::vector<double> censored_shares(std::span<const MleResult> fits) {
  std::uint64_t total = 0;
  for (const auto& f : fits) total += f.records;
  std::vector<double> shares;
  for (const auto& f : fits) {
    shares.push_back(static_cast<double>(f.records) / static_cast<double>(total));
  }
  return shares;
}

}  // namespace dpinfer

#endif  // DPINFER_CENSORED_MLE_HPP
