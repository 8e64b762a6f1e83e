#ifndef DPINFER_REPORT_HPP
#define DPINFER_REPORT_HPP

// JSON views of the result types. nlohmann::json prints doubles with the
// shortest representation that parses back to the same value.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dpinfer/censored_mle.hpp"
#include "dpinfer/crossfit.hpp"
#include "dpinfer/data_model.hpp"
#include "dpinfer/error.hpp"
#include "dpinfer/inference.hpp"
#include "dpinfer/propagation.hpp"
#include "dpinfer/simlab.hpp"

namespace dpinfer::report {

using json = nlohmann::ordered_json;

/// 64-bit FNV-1a, used as a stable content fingerprint for input files.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// NaN and infinities have no JSON spelling; they become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Diagnostics& diags) {
  json out = json::array();
  for (const auto& d : diags) out.push_back({{"code", d.code}, {"message", d.message}});
  return out;
}

inline json to_json(const SmoothingConfig& cfg) {
  if (cfg.mode() == SmoothingConfig::Mode::fixed) {
    return {{"mode", "fixed"}, {"alpha", cfg.fixed_alpha()}};
  }
  return {{"mode", "rule"}, {"c", cfg.c()}, {"q", cfg.q()}};
}

inline json to_json(const MeansWithCovariance& m) {
  json groups = json::array();
  for (std::size_t g = 0; g < m.size(); ++g) {
    groups.push_back({{"label", m.labels[g]},
                      {"s_hat", number(m.s_hat[g])},
                      {"p_hat", number(m.p_hat[g])},
                      {"sigma2", number(m.sigma2[g])}});
  }
  return groups;
}

inline json to_json(const DpEstimate& e) {
  return {{"dp", number(e.dp)},
          {"variance", number(e.variance)},
          {"se", number(e.se)},
          {"n", e.n},
          {"alpha_used", e.alpha_used ? json(*e.alpha_used) : json(nullptr)},
          {"estimand", to_string(e.estimand)},
          {"min_value", number(e.min_value)},
          {"max_value", number(e.max_value)}};
}

inline json to_json(const ConfidenceInterval& ci) {
  return {{"level", ci.level},
          {"critical_value", number(ci.critical_value)},
          {"lower", number(ci.lower)},
          {"upper", number(ci.upper)},
          {"clipped_lower", number(ci.clipped_lower)},
          {"clipped_upper", number(ci.clipped_upper)}};
}

inline json to_json(const TestResult& t) {
  return {{"kind", to_string(t.kind)},
          {"z", number(t.z)},
          {"p_value", number(t.p_value)},
          {"critical_value", number(t.critical_value)},
          {"reject_at_5pct", t.reject_at_5pct}};
}

inline json to_json(const MleResult& r) {
  return {{"label", r.label},
          {"s_hat", number(r.s_hat)},
          {"se", number(r.se)},
          {"loglik", number(r.loglik)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"boundary", to_string(r.boundary)},
          {"records", r.records}};
}

inline json to_json(const CrossfitResult& r) {
  json folds = json::array();
  for (std::size_t f = 0; f < r.fold_estimates.size(); ++f) {
    folds.push_back({{"fold", f},
                     {"estimate", number(r.fold_estimates[f])},
                     {"argmin", r.selected[f].argmin},
                     {"argmax", r.selected[f].argmax}});
  }
  return {{"dp", number(r.dp)},
          {"se_heuristic", number(r.se_heuristic)},
          {"se_note", "heuristic sd(fold estimates)/sqrt(K); not asymptotically justified"},
          {"folds", folds}};
}

/// Bounds the smooth estimate can deviate from the hard min/max ratio.
inline json estimand_gap(const DpEstimate& est, const MeansWithCovariance& m) {
  if (!est.alpha_used) return nullptr;
  const auto [lo, hi] = std::minmax_element(m.s_hat.begin(), m.s_hat.end());
  const double gap = std::log(static_cast<double>(m.size())) / *est.alpha_used;
  const auto bounds = smooth_dp_bounds(*lo, *hi, m.size(), Alpha(*est.alpha_used));
  return {{"ln_g_over_alpha", number(gap)},
          {"raw_dp", number(*lo / *hi)},
          {"smooth_dp_lower", number(bounds.first)},
          {"smooth_dp_upper", number(bounds.second)}};
}

inline json to_json(const SimSummary& s, const ScenarioSpec& spec) {
  json variants = json::array();
  for (const auto& v : s.variants) {
    json hist = {{"edges", json::array()}, {"counts", json::array()}};
    for (double e : v.histogram.edges) hist["edges"].push_back(number(e));
    for (auto c : v.histogram.counts) hist["counts"].push_back(c);
    variants.push_back({{"name", v.name},
                        {"estimand", to_string(v.estimand)},
                        {"alpha", v.alpha ? json(*v.alpha) : json(nullptr)},
                        {"center", number(v.center)},
                        {"used", v.used},
                        {"excluded", v.excluded},
                        {"mean", number(v.moments.mean)},
                        {"sd", number(v.moments.sd)},
                        {"skewness", number(v.moments.skewness)},
                        {"coverage", number(v.coverage)},
                        {"reference", v.reference.empty() ? json(nullptr) : json(v.reference)},
                        {"reference_sd", number(v.reference_sd)},
                        {"ks_distance", v.ks_distance ? number(*v.ks_distance) : json(nullptr)},
                        {"histogram", hist}});
  }
  json rates = json::array(), shares = json::array();
  for (double r : spec.true_rates) rates.push_back(r);
  for (double p : spec.shares) shares.push_back(p);
  return {{"command", "simulate"},
          {"scenario",
           {{"rates", rates},
            {"shares", shares},
            {"n", spec.n},
            {"replications", spec.replications},
            {"seed", spec.seed},
            {"level", spec.level}}},
          {"statistic", "sqrt(N) * (DP_hat - DP_0)"},
          {"variants", variants},
          {"diagnostics", to_json(s.diagnostics)}};
}

/// Histogram rows for external plotting: variant,bin_lower,bin_upper,count.
inline std::string histogram_csv(const SimSummary& s) {
  std::string out = "variant,bin_lower,bin_upper,count\n";
  for (const auto& v : s.variants) {
    for (std::size_t b = 0; b < v.histogram.counts.size(); ++b) {
      out += v.name + "," + json(v.histogram.edges[b]).dump() + "," +
             json(v.histogram.edges[b + 1]).dump() + "," +
             std::to_string(v.histogram.counts[b]) + "\n";
    }
  }
  return out;
}

}  // namespace dpinfer::report

#endif  // DPINFER_REPORT_HPP
