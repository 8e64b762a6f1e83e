#ifndef DPINFER_SIMLAB_HPP
#define DPINFER_SIMLAB_HPP

// Seeded Monte Carlo for the sampling distribution of sqrt(N) (DP_hat - DP_0).
//
// One replication: group sizes ~ Multinomial(N, p), successes per group
// ~ Binomial(n_g, s_g), then every variant (raw or smoothed) is estimated on
// the same draw. Replication r always consumes stream (seed, r), and results
// are reduced in replication order, so output does not depend on the number
// of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dpinfer/data_model.hpp"
#include "dpinfer/error.hpp"
#include "dpinfer/inference.hpp"
#include "dpinfer/normal.hpp"
#include "dpinfer/propagation.hpp"
#include "dpinfer/rng.hpp"
#include "dpinfer/smoothing.hpp"
#include "dpinfer/stats.hpp"

namespace dpinfer {

/// A DP flavor to simulate. No smoothing means the hard min/max ratio.
/// Names follow the scenario-file syntax.
struct Variant {
  std::string name;
  std::optional<SmoothingConfig> smoothing;

  static Variant raw() { return {"raw", std::nullopt}; }
  static Variant fixed(double alpha) {
    return {"fixed:" + format_number(alpha), SmoothingConfig::fixed(alpha)};
  }
  static Variant rule(double c, double q) {
    return {"rule:" + format_number(c) + ":" + format_number(q), SmoothingConfig::rule(c, q)};
  }
};

struct ScenarioSpec {
  std::vector<double> true_rates;
  std::vector<double> shares;
  std::uint64_t n = 0;
  std::vector<Variant> variants;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::size_t histogram_bins = 0;  // 0: Freedman-Diaconis
  unsigned threads = 0;            // 0: hardware concurrency
  bool keep_samples = false;

  void validate() const {
    if (true_rates.empty()) fail(ErrorKind::invalid_input, "scenario: no true rates");
    if (true_rates.size() != shares.size()) {
      fail(ErrorKind::invalid_input, "scenario: rates and shares differ in length");
    }
    double total = 0.0;
    for (std::size_t g = 0; g < shares.size(); ++g) {
      if (!(true_rates[g] > 0.0 && true_rates[g] < 1.0)) {
        fail(ErrorKind::invalid_input, "scenario: true rates must lie in (0, 1)");
      }
      if (!(shares[g] > 0.0)) fail(ErrorKind::invalid_input, "scenario: shares must be positive");
      total += shares[g];
    }
    if (std::abs(total - 1.0) > 1e-12) {
      fail(ErrorKind::invalid_input, "scenario: shares must sum to 1");
    }
    if (n == 0) fail(ErrorKind::invalid_input, "scenario: n must be at least 1");
    if (replications == 0) fail(ErrorKind::invalid_input, "scenario: replications must be >= 1");
    if (variants.empty()) fail(ErrorKind::invalid_input, "scenario: no variants");
    if (!(level > 0.0 && level < 1.0)) {
      fail(ErrorKind::invalid_input, "scenario: level must lie in (0, 1)");
    }
  }
};

struct VariantSummary {
  std::string name;
  Estimand estimand = Estimand::raw;
  std::optional<double> alpha;
  /// DP_0 for this variant: rsmin(s)/rsmax(s) or min(s)/max(s).
  double center = 0.0;
  std::uint64_t used = 0;
  std::uint64_t excluded = 0;
  stats::Moments moments;
  double coverage = 0.0;
  stats::Histogram histogram;
  /// Analytic reference the empirical distribution is compared against.
  std::string reference;
  double reference_sd = 0.0;
  std::optional<double> ks_distance;
  std::vector<double> samples;
};

struct SimSummary {
  std::uint64_t replications = 0;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  std::vector<VariantSummary> variants;
  Diagnostics diagnostics;
};

/// One replication's sampled data.
struct Draw {
  std::vector<std::uint64_t> trials;
  std::vector<std::uint64_t> successes;

  bool every_group_observed() const {
    return std::none_of(trials.begin(), trials.end(), [](auto t) { return t == 0; });
  }
  std::vector<double> rates() const {
    std::vector<double> r(trials.size());
    for (std::size_t g = 0; g < r.size(); ++g) {
      r[g] = static_cast<double>(successes[g]) / static_cast<double>(trials[g]);
    }
    return r;
  }
};

inline Draw draw_replication(const ScenarioSpec& spec, std::uint64_t replication) {
  auto rng = make_stream(spec.seed, replication);
  const std::size_t groups = spec.shares.size();
  Draw d;
  d.trials.resize(groups);
  d.successes.resize(groups);
  // Multinomial as a chain of conditional binomials.
  std::uint64_t remaining = spec.n;
  double mass = 1.0;
  for (std::size_t g = 0; g < groups; ++g) {
    if (g + 1 == groups) {
      d.trials[g] = remaining;
    } else if (remaining == 0) {
      d.trials[g] = 0;
    } else {
      const double p = std::clamp(spec.shares[g] / mass, 0.0, 1.0);
      std::binomial_distribution<std::uint64_t> bin(remaining, p);
      d.trials[g] = bin(rng);
    }
    remaining -= d.trials[g];
    mass -= spec.shares[g];
  }
  for (std::size_t g = 0; g < groups; ++g) {
    if (d.trials[g] == 0) continue;
    std::binomial_distribution<std::uint64_t> bin(d.trials[g], spec.true_rates[g]);
    d.successes[g] = bin(rng);
  }
  return d;
}

inline MeansWithCovariance means_from_draw(const Draw& d) {
  std::vector<GroupCount> groups;
  for (std::size_t g = 0; g < d.trials.size(); ++g) {
    groups.push_back({"g" + std::to_string(g + 1), d.successes[g], d.trials[g]});
  }
  return estimate_means(GroupedCounts(std::move(groups)));
}

/// Runs fn(i) for i in [0, count) on a pool of threads; results come back in
/// index order. The first exception thrown by any task is rethrown.
template <class Fn>
auto parallel_map(std::uint64_t count, unsigned threads, Fn&& fn)
    -> std::vector<decltype(fn(std::uint64_t{}))> {
  using R = decltype(fn(std::uint64_t{}));
  std::vector<R> out(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(count, 1)));

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// Evaluates a statistic on every replication's draw. Replications for which
/// the statistic returns nothing are dropped (order is otherwise preserved).
inline std::vector<double> simulate_statistic(
    const ScenarioSpec& spec, const std::function<std::optional<double>(const Draw&)>& statistic) {
  spec.validate();
  auto values = parallel_map(spec.replications, spec.threads, [&](std::uint64_t r) {
    return statistic(draw_replication(spec, r));
  });
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    if (v) out.push_back(*v);
  }
  return out;
}

/// Limiting CDF of sqrt(N)(max(s1_hat, s2_hat) - s) for two equal-size groups
/// sharing the rate s: Phi(x / sqrt(2 s (1 - s)))^2.
inline double max_limit_reference(double s, double x) {
  if (!(s > 0.0 && s < 1.0)) fail(ErrorKind::domain, "max_limit_reference: s must lie in (0, 1)");
  const double phi = normal_cdf(x / std::sqrt(2.0 * s * (1.0 - s)));
  return phi * phi;
}

/// CDF of -(sqrt(2) sigma / s) |Z1 - Z2|, the limit of sqrt(N)(DP_hat - 1)
/// for two equal-size groups with equal rates. Supported on x <= 0.
inline double dp_limit_reference(double s, double sigma, double x) {
  if (!(s > 0.0) || !(sigma > 0.0)) {
    fail(ErrorKind::domain, "dp_limit_reference: s and sigma must be positive");
  }
  if (x >= 0.0) return 1.0;
  return 2.0 * normal_sf(-x * s / (2.0 * sigma));
}

namespace detail {

struct VariantPlan {
  std::string name;
  std::optional<Alpha> alpha;
  double center = 0.0;
  double reference_sd = 0.0;
  std::string reference;
  std::function<double(double)> reference_cdf;
};

inline std::vector<VariantPlan> plan_variants(const ScenarioSpec& spec, Diagnostics& diags) {
  MeansWithCovariance truth;
  truth.n = spec.n;
  truth.s_hat = spec.true_rates;
  truth.p_hat = spec.shares;
  for (std::size_t g = 0; g < spec.shares.size(); ++g) {
    truth.labels.push_back("g" + std::to_string(g + 1));
    truth.sigma2.push_back(spec.true_rates[g] * (1.0 - spec.true_rates[g]) / spec.shares[g]);
  }
  const bool two_equal = spec.true_rates.size() == 2 &&
                         spec.true_rates[0] == spec.true_rates[1] &&
                         spec.shares[0] == spec.shares[1];

  std::vector<VariantPlan> plans;
  for (const auto& v : spec.variants) {
    VariantPlan p;
    p.name = v.name;
    SmoothedExtremes ext;
    if (v.smoothing) {
      auto resolved = resolve_alpha(*v.smoothing, spec.n);
      for (auto d : resolved.diagnostics) {
        d.message = v.name + ": " + d.message;
        diags.push_back(std::move(d));
      }
      p.alpha = resolved.alpha;
      ext = smoothed_extremes(truth, resolved.alpha);
    } else {
      ext = hard_extremes(truth);
    }
    p.center = ext.min_value / ext.max_value;

    if (!v.smoothing && two_equal) {
      const double s = spec.true_rates[0];
      const double sigma = std::sqrt(s * (1.0 - s));
      p.reference = "negative_half_normal";
      p.reference_sd = 2.0 * sigma / s;
      p.reference_cdf = [s, sigma](double x) { return dp_limit_reference(s, sigma, x); };
    } else if (spec.true_rates.size() >= 2) {
      const double var = dp_point_and_variance(ext).variance;
      if (var > 0.0) {
        const double sd = std::sqrt(var);
        p.reference = "normal";
        p.reference_sd = sd;
        p.reference_cdf = [sd](double x) { return normal_cdf(x / sd); };
      }
    }
    plans.push_back(std::move(p));
  }
  return plans;
}

struct VariantDraw {
  bool ok = false;
  double stat = 0.0;
  bool covered = false;
};

}  // namespace detail

inline SimSummary simulate(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.true_rates.size() < 2) {
    fail(ErrorKind::invalid_input, "scenario: DP simulation needs at least two groups");
  }
  SimSummary summary;
  summary.replications = spec.replications;
  summary.seed = spec.seed;
  summary.n = spec.n;
  const auto plans = detail::plan_variants(spec, summary.diagnostics);
  const double root_n = std::sqrt(static_cast<double>(spec.n));
  const double z = normal_quantile(0.5 * (1.0 + spec.level));

  auto per_rep = parallel_map(spec.replications, spec.threads, [&](std::uint64_t r) {
    std::vector<detail::VariantDraw> row(plans.size());
    const auto draw = draw_replication(spec, r);
    if (!draw.every_group_observed()) return row;
    const auto means = means_from_draw(draw);
    if (!(*std::max_element(means.s_hat.begin(), means.s_hat.end()) > 0.0)) return row;
    for (std::size_t v = 0; v < plans.size(); ++v) {
      const auto est = plans[v].alpha ? dp_point_and_variance(smoothed_extremes(means, *plans[v].alpha))
                                      : dp_raw(means);
      row[v].ok = true;
      row[v].stat = root_n * (est.dp - plans[v].center);
      row[v].covered = std::abs(est.dp - plans[v].center) <= z * est.se;
    }
    return row;
  });

  std::uint64_t dropped = 0;
  for (const auto& row : per_rep) {
    if (!row.empty() && !row[0].ok) ++dropped;
  }
  if (dropped > 0) {
    summary.diagnostics.push_back(
        {"excluded_replications", std::to_string(dropped) +
                                      " replications had an empty group or all-zero rates and "
                                      "were excluded"});
  }

  for (std::size_t v = 0; v < plans.size(); ++v) {
    VariantSummary vs;
    vs.name = plans[v].name;
    vs.estimand = plans[v].alpha ? Estimand::smooth : Estimand::raw;
    if (plans[v].alpha) vs.alpha = plans[v].alpha->value();
    vs.center = plans[v].center;
    vs.reference = plans[v].reference;
    vs.reference_sd = plans[v].reference_sd;
    std::vector<double> sample;
    sample.reserve(per_rep.size());
    std::uint64_t covered = 0;
    for (const auto& row : per_rep) {
      if (!row[v].ok) {
        ++vs.excluded;
        continue;
      }
      sample.push_back(row[v].stat);
      if (row[v].covered) ++covered;
    }
    vs.used = sample.size();
    vs.moments = stats::moments(sample);
    vs.coverage = sample.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(sample.size());
    vs.histogram = stats::histogram(sample, spec.histogram_bins);
    if (plans[v].reference_cdf && !sample.empty()) {
      vs.ks_distance = stats::ks_distance(sample, plans[v].reference_cdf);
    }
    if (spec.keep_samples) vs.samples = std::move(sample);
    summary.variants.push_back(std::move(vs));
  }
  return summary;
}

}  // namespace dpinfer

#endif  // DPINFER_SIMLAB_HPP
