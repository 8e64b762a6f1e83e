// Library walk-through: audit two groups, test against the four-fifths rule,
// and watch the estimate approach the raw ratio as alpha grows.

#include <cstdio>
#include <vector>

#include "dpinfer/dpinfer.hpp"

int main() {
  using namespace dpinfer;

  const GroupedCounts counts({{"A", 1000, 10000}, {"B", 500, 10000}});
  const auto means = estimate_means(counts);

  const auto smooth = estimate_dp(means, SmoothingConfig::default_rule());
  const auto ci = confidence_interval(smooth);
  const auto eeoc = test_eeoc(smooth);
  std::printf("smooth DP %.6f  se %.6f  alpha %.3f\n", smooth.dp, smooth.se, *smooth.alpha_used);
  std::printf("95%% CI [%.6f, %.6f]\n", ci.lower, ci.upper);
  std::printf("EEOC: z = %.3f, p = %.3g, reject = %s\n", eeoc.z, eeoc.p_value,
              eeoc.reject_at_5pct ? "yes" : "no");

  for (double alpha : {10.0, 100.0, 1000.0, 1e6}) {
    const auto est = estimate_dp(means, SmoothingConfig::fixed(alpha));
    std::printf("alpha %-9g DP %.6f  se %.6f\n", alpha, est.dp, est.se);
  }
  const auto raw = dp_raw(means);
  std::printf("raw        DP %.6f  se %.6f\n", raw.dp, raw.se);
  return 0;
}
