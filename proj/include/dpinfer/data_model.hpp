#ifndef DPINFER_DATA_MODEL_HPP
#define DPINFER_DATA_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dpinfer/error.hpp"

namespace dpinfer {

/// One binary outcome for one unit (one application) in a labelled group.
struct UnitRecord {
  std::string group;
  int outcome = 0;
};

/// Censored observation: a member filed `applications` applications and we
/// only see whether at least one of them succeeded.
struct CensoredRecord {
  std::string group;
  std::uint64_t applications = 1;
  int hired = 0;
};

struct GroupCount {
  std::string label;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
};

/// Per-group success/trial tallies. Group order is significant: every vector
/// derived from these counts uses it.
class GroupedCounts {
 public:
  GroupedCounts() = default;

  /// Validates and takes ownership. total_n is the sum of trials.
  explicit GroupedCounts(std::vector<GroupCount> groups) : groups_(std::move(groups)) {
    if (groups_.empty()) fail(ErrorKind::invalid_input, "no groups");
    std::unordered_set<std::string> seen;
    for (const auto& g : groups_) {
      if (g.label.empty()) fail(ErrorKind::invalid_input, "empty group label");
      if (!seen.insert(g.label).second) {
        fail(ErrorKind::invalid_input, "duplicate group label '" + g.label + "'");
      }
      if (g.trials == 0) {
        fail(ErrorKind::invalid_input, "group '" + g.label + "' has zero trials");
      }
      if (g.successes > g.trials) {
        fail(ErrorKind::invalid_input,
             "group '" + g.label + "' has more successes than trials");
      }
      total_n_ += g.trials;
    }
  }

  const std::vector<GroupCount>& groups() const noexcept { return groups_; }
  std::size_t size() const noexcept { return groups_.size(); }
  std::uint64_t total_n() const noexcept { return total_n_; }

 private:
  std::vector<GroupCount> groups_;
  std::uint64_t total_n_ = 0;
};

/// Plug-in rates, shares and per-group CLT variances s(1-s)/p.
struct MeansWithCovariance {
  std::vector<std::string> labels;
  std::vector<double> s_hat;
  std::vector<double> p_hat;
  std::vector<double> sigma2;
  std::uint64_t n = 0;
  Diagnostics diagnostics;

  std::size_t size() const noexcept { return s_hat.size(); }
};

struct VarianceOptions {
  /// Use (x + 0.5) / (n + 1) in the variance (never the point estimate).
  bool continuity_correction = false;
};

/// Tallies unit records per label, in first-appearance order.
inline GroupedCounts aggregate(std::span<const UnitRecord> records) {
  if (records.empty()) fail(ErrorKind::invalid_input, "no records to aggregate");
  std::vector<GroupCount> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.outcome != 0 && r.outcome != 1) {
      fail(ErrorKind::invalid_input,
           "record " + std::to_string(i) + ": outcome must be 0 or 1");
    }
    if (r.group.empty()) {
      fail(ErrorKind::invalid_input, "record " + std::to_string(i) + ": empty group label");
    }
    auto [it, inserted] = index.try_emplace(r.group, groups.size());
    if (inserted) groups.push_back({r.group, 0, 0});
    auto& g = groups[it->second];
    g.trials += 1;
    g.successes += static_cast<std::uint64_t>(r.outcome);
  }
  return GroupedCounts(std::move(groups));
}

inline MeansWithCovariance estimate_means(const GroupedCounts& counts,
                                          VarianceOptions options = {}) {
  MeansWithCovariance m;
  m.n = counts.total_n();
  const double n = static_cast<double>(m.n);
  for (const auto& g : counts.groups()) {
    const double x = static_cast<double>(g.successes);
    const double trials = static_cast<double>(g.trials);
    const double s = x / trials;
    const double p = trials / n;
    double sv = s;
    if (options.continuity_correction) sv = (x + 0.5) / (trials + 1.0);
    m.labels.push_back(g.label);
    m.s_hat.push_back(s);
    m.p_hat.push_back(p);
    m.sigma2.push_back(sv * (1.0 - sv) / p);
    if (g.successes == 0 || g.successes == g.trials) {
      m.diagnostics.push_back(
          {"degenerate_variance",
           "group '" + g.label + "' has success rate " + (g.successes == 0 ? "0" : "1") +
               (options.continuity_correction
                    ? "; variance uses the continuity-corrected rate"
                    : "; its plug-in variance is zero")});
    }
  }
  return m;
}

}  // namespace dpinfer

#endif  // DPINFER_DATA_MODEL_HPP
