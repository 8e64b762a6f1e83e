#ifndef DPINFER_CROSSFIT_HPP
#define DPINFER_CROSSFIT_HPP

// K-fold cross-fitted DP. For each fold k the argmin/argmax groups are chosen
// on the other K-1 folds, and their rates are measured on fold k alone. The
// estimate is the plain mean of the K fold ratios.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpinfer/data_model.hpp"
#include "dpinfer/error.hpp"
#include "dpinfer/rng.hpp"

namespace dpinfer {

struct CrossfitConfig {
  std::size_t k = 5;
  std::uint64_t seed = 0;
};

struct FoldSelection {
  std::string argmin;
  std::string argmax;
};

struct CrossfitResult {
  double dp = 0.0;
  std::vector<double> fold_estimates;
  /// sd(fold estimates) / sqrt(K). Not asymptotically justified.
  double se_heuristic = 0.0;
  std::vector<FoldSelection> selected;
  /// Fold index of every input record, in input order.
  std::vector<std::size_t> fold_of;
  std::vector<std::string> labels;
};

namespace detail {

// First index of the smallest / largest rate; ties go to the earlier group.
inline std::pair<std::size_t, std::size_t> arg_extremes(std::span<const double> rates) {
  std::size_t lo = 0, hi = 0;
  for (std::size_t g = 1; g < rates.size(); ++g) {
    if (rates[g] < rates[lo]) lo = g;
    if (rates[g] > rates[hi]) hi = g;
  }
  return {lo, hi};
}

}  // namespace detail

/// Stratified fold assignment: each group's records are shuffled (Fisher-Yates
/// driven by the seed) and dealt round-robin, so every group lands in every
/// fold as long as it has at least K records.
inline std::vector<std::size_t> assign_folds(std::span<const std::size_t> group_of,
                                             std::size_t groups, std::size_t k,
                                             std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> members(groups);
  for (std::size_t i = 0; i < group_of.size(); ++i) members[group_of[i]].push_back(i);
  std::vector<std::size_t> fold_of(group_of.size(), 0);
  for (std::size_t g = 0; g < groups; ++g) {
    auto rng = make_stream(seed, g);
    auto& idx = members[g];
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[uniform_below(rng, i)]);
    }
    for (std::size_t pos = 0; pos < idx.size(); ++pos) fold_of[idx[pos]] = pos % k;
  }
  return fold_of;
}

inline CrossfitResult crossfit_dp(std::span<const UnitRecord> records,
                                  const CrossfitConfig& config = {}) {
  if (config.k < 2) fail(ErrorKind::invalid_input, "cross-fitting needs k >= 2 folds");
  const auto counts = aggregate(records);
  const std::size_t groups = counts.size();
  const std::size_t k = config.k;

  for (const auto& g : counts.groups()) {
    if (g.trials < k) {
      fail(ErrorKind::invalid_input, "group '" + g.label + "' has " + std::to_string(g.trials) +
                                         " records, fewer than k = " + std::to_string(k));
    }
    if (g.successes == 0) {
      fail(ErrorKind::invalid_input, "group '" + g.label + "' has no successes");
    }
  }

  CrossfitResult out;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t g = 0; g < groups; ++g) {
    index.emplace(counts.groups()[g].label, g);
    out.labels.push_back(counts.groups()[g].label);
  }
  std::vector<std::size_t> group_of(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) group_of[i] = index.at(records[i].group);
  out.fold_of = assign_folds(group_of, groups, k, config.seed);

  // successes[f][g], trials[f][g]
  std::vector<std::vector<double>> succ(k, std::vector<double>(groups, 0.0));
  std::vector<std::vector<double>> trials(k, std::vector<double>(groups, 0.0));
  for (std::size_t i = 0; i < records.size(); ++i) {
    succ[out.fold_of[i]][group_of[i]] += records[i].outcome;
    trials[out.fold_of[i]][group_of[i]] += 1.0;
  }

  std::string invalid;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<double> rest(groups), here(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      double s = 0.0, t = 0.0;
      for (std::size_t other = 0; other < k; ++other) {
        if (other == f) continue;
        s += succ[other][g];
        t += trials[other][g];
      }
      rest[g] = s / t;
      here[g] = succ[f][g] / trials[f][g];
    }
    const auto [lo, hi] = detail::arg_extremes(rest);
    out.selected.push_back({out.labels[lo], out.labels[hi]});
    if (!(here[hi] > 0.0)) {
      invalid += (invalid.empty() ? "" : "; ") + std::string("fold ") + std::to_string(f) +
                 ": selected argmax group '" + out.labels[hi] + "' has zero successes";
      out.fold_estimates.push_back(std::nan(""));
      continue;
    }
    out.fold_estimates.push_back(here[lo] / here[hi]);
  }
  if (!invalid.empty()) {
    fail(ErrorKind::undefined_dp, "cross-fitted DP undefined: " + invalid);
  }

  const double kk = static_cast<double>(k);
  double sum = 0.0;
  for (double v : out.fold_estimates) sum += v;
  out.dp = sum / kk;
  double ss = 0.0;
  for (double v : out.fold_estimates) ss += (v - out.dp) * (v - out.dp);
  out.se_heuristic = std::sqrt(ss / (kk - 1.0)) / std::sqrt(kk);
  return out;
}

}  // namespace dpinfer

#endif  // DPINFER_CROSSFIT_HPP
