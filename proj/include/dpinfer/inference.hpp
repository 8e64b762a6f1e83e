#ifndef DPINFER_INFERENCE_HPP
#define DPINFER_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "dpinfer/error.hpp"
#include "dpinfer/normal.hpp"
#include "dpinfer/propagation.hpp"

namespace dpinfer {

struct ConfidenceInterval {
  double level = 0.95;
  double lower = 0.0;
  double upper = 0.0;
  double clipped_lower = 0.0;
  double clipped_upper = 0.0;
  double critical_value = 0.0;
  Diagnostics diagnostics;
};

enum class TestKind { eeoc_less_than_threshold, ab_two_sided, ab_one_sided_b_gt_a };

inline const char* to_string(TestKind kind) {
  switch (kind) {
    case TestKind::eeoc_less_than_threshold: return "eeoc_less_than_0.8";
    case TestKind::ab_two_sided: return "ab_two_sided";
    case TestKind::ab_one_sided_b_gt_a: return "ab_one_sided_B_gt_A";
  }
  return "unknown";
}

enum class Sided { two, one_b_gt_a };

struct TestResult {
  double z = 0.0;
  double p_value = 1.0;
  bool reject_at_5pct = false;
  TestKind kind = TestKind::ab_two_sided;
  double critical_value = 0.0;
};

/// The EEOC four-fifths threshold.
inline constexpr double kEeocThreshold = 0.8;
inline constexpr double kSignificance = 0.05;

/// p-value implied by a z statistic for the given test.
inline double p_value_for(TestKind kind, double z) {
  switch (kind) {
    case TestKind::eeoc_less_than_threshold: return normal_cdf(z);
    case TestKind::ab_two_sided: return 2.0 * normal_sf(std::abs(z));
    case TestKind::ab_one_sided_b_gt_a: return normal_sf(z);
  }
  return 1.0;
}

inline ConfidenceInterval confidence_interval(const DpEstimate& est, double level = 0.95) {
  if (!(level > 0.0 && level < 1.0)) {
    fail(ErrorKind::invalid_input, "confidence level must lie in (0, 1)");
  }
  if (!std::isfinite(est.se)) {
    fail(ErrorKind::invalid_input, "standard error is not finite");
  }
  ConfidenceInterval ci;
  ci.level = level;
  ci.critical_value = normal_quantile(0.5 * (1.0 + level));
  const double half = ci.critical_value * est.se;
  ci.lower = est.dp - half;
  ci.upper = est.dp + half;
  ci.clipped_lower = std::clamp(ci.lower, 0.0, 1.0);
  ci.clipped_upper = std::clamp(ci.upper, 0.0, 1.0);
  if (est.se == 0.0) {
    ci.diagnostics.push_back(
        {"degenerate_interval", "standard error is zero; the interval collapses to the point"});
  }
  return ci;
}

/// One-sided test of H0: DP >= threshold against H1: DP < threshold.
inline TestResult test_eeoc(const DpEstimate& est, double threshold = kEeocThreshold) {
  if (!(est.se > 0.0) || !std::isfinite(est.se)) {
    fail(ErrorKind::test_undefined, "EEOC test undefined: standard error is zero");
  }
  TestResult r;
  r.kind = TestKind::eeoc_less_than_threshold;
  r.z = (est.dp - threshold) / est.se;
  r.p_value = p_value_for(r.kind, r.z);
  r.critical_value = normal_quantile(kSignificance);
  r.reject_at_5pct = r.z < r.critical_value;
  return r;
}

/// Compares two independent DP estimates; z = (DP_B - DP_A) / pooled se.
inline TestResult test_ab(const DpEstimate& a, const DpEstimate& b, Sided sided) {
  const double pooled = std::sqrt(b.se * b.se + a.se * a.se);
  if (!(pooled > 0.0) || !std::isfinite(pooled)) {
    fail(ErrorKind::test_undefined, "A/B test undefined: pooled standard error is zero");
  }
  TestResult r;
  r.z = (b.dp - a.dp) / pooled;
  if (sided == Sided::two) {
    r.kind = TestKind::ab_two_sided;
    r.critical_value = normal_quantile(1.0 - kSignificance / 2.0);
    r.reject_at_5pct = std::abs(r.z) > r.critical_value;
  } else {
    // H1: DP_B > DP_A, so large z rejects; this matches the p-value 1 - Phi(z).
    r.kind = TestKind::ab_one_sided_b_gt_a;
    r.critical_value = normal_quantile(1.0 - kSignificance);
    r.reject_at_5pct = r.z > r.critical_value;
  }
  r.p_value = p_value_for(r.kind, r.z);
  return r;
}

}  // namespace dpinfer

#endif  // DPINFER_INFERENCE_HPP
