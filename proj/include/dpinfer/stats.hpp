#ifndef DPINFER_STATS_HPP
#define DPINFER_STATS_HPP

// Descriptive statistics used by the simulation lab.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dpinfer/error.hpp"

namespace dpinfer::stats {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;        // n - 1 denominator
  double skewness = 0.0;  // adjusted Fisher-Pearson G1
};

/// Two-pass moments, summed in index order.
inline Moments moments(std::span<const double> x) {
  Moments m;
  m.count = x.size();
  if (x.empty()) return m;
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  m.mean = sum / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  if (x.size() > 1) m.sd = std::sqrt(m2 / (n - 1.0));
  if (x.size() > 2 && m2 > 0.0) {
    const double g1 = (m3 / n) / std::pow(m2 / n, 1.5);
    m.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
  }
  return m;
}

/// Linear-interpolated quantile of sorted data (type 7).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) fail(ErrorKind::invalid_input, "quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Kolmogorov-Smirnov distance sup |F_n - F| for a continuous reference F.
/// Tied sample values are handled as a single jump.
inline double ks_distance(std::span<const double> sample,
                          const std::function<double(double)>& cdf) {
  if (sample.empty()) fail(ErrorKind::invalid_input, "KS distance of empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double f = cdf(x[i]);
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    d = std::max({d, std::abs(f - below), std::abs(at - f)});
    i = j;
  }
  return d;
}

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::uint64_t> counts;
};

/// Freedman-Diaconis bin count, clamped to [1, 1000]; falls back to Sturges
/// when the IQR is zero.
inline std::size_t freedman_diaconis_bins(std::span<const double> sample) {
  if (sample.size() < 2) return 1;
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (range <= 0.0) return 1;
  const double iqr = quantile_sorted(x, 0.75) - quantile_sorted(x, 0.25);
  double bins;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(x.size()));
    bins = std::ceil(range / width);
  } else {
    bins = std::ceil(std::log2(static_cast<double>(x.size()))) + 1.0;
  }
  return static_cast<std::size_t>(std::clamp(bins, 1.0, 1000.0));
}

/// Equal-width histogram over [min, max]; the last bin is closed.
inline Histogram histogram(std::span<const double> sample, std::size_t bins = 0) {
  Histogram h;
  if (sample.empty()) return h;
  if (bins == 0) bins = freedman_diaconis_bins(sample);
  const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : sample) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
  }
  return h;
}

}  // namespace dpinfer::stats

#endif  // DPINFER_STATS_HPP
