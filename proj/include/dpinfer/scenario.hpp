#ifndef DPINFER_SCENARIO_HPP
#define DPINFER_SCENARIO_HPP

// Plain-text scenario files for the simulation lab:
//
//   # two groups at 10% and 5%
//   rates        = 0.10, 0.05
//   shares       = 0.5, 0.5        (optional, default equal)
//   n            = 10000
//   replications = 20000
//   seed         = 7               (optional)
//   variants     = raw, rule:1:0.4, fixed:20
//   level        = 0.95            (optional)
//   bins         = 0               (optional, 0 = Freedman-Diaconis)
//   threads      = 0               (optional, 0 = all cores)

#include <cctype>
#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpinfer/error.hpp"
#include "dpinfer/simlab.hpp"

namespace dpinfer::scenario {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline double to_double(std::string_view v, std::string_view key) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) {
    fail(ErrorKind::invalid_input,
         "scenario: '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

inline std::uint64_t to_count(std::string_view v, std::string_view key) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) {
    // Accept integral scientific notation such as 1e5.
    const double d = to_double(v, key);
    if (d < 0.0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      fail(ErrorKind::invalid_input, "scenario: '" + std::string(key) +
                                         "' expects a non-negative integer, got '" +
                                         std::string(v) + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
  return out;
}

inline std::vector<double> to_doubles(std::string_view v, std::string_view key) {
  std::vector<double> out;
  for (auto part : split(v, ',')) out.push_back(to_double(part, key));
  return out;
}

}  // namespace detail

/// Parses `raw`, `fixed:<alpha>` (or a bare number), `rule:<c>:<q>`.
inline Variant parse_variant(std::string_view text) {
  if (text == "raw") return Variant::raw();
  const auto parts = detail::split(text, ':');
  if (parts.size() == 1) return Variant::fixed(detail::to_double(parts[0], "variants"));
  if (parts[0] == "fixed" && parts.size() == 2) {
    return Variant::fixed(detail::to_double(parts[1], "variants"));
  }
  if (parts[0] == "rule" && parts.size() == 3) {
    return Variant::rule(detail::to_double(parts[1], "variants"),
                         detail::to_double(parts[2], "variants"));
  }
  fail(ErrorKind::invalid_input, "scenario: unknown variant '" + std::string(text) + "'");
}

/// Reads a scenario. `default_seed` applies when the file has no seed key.
inline ScenarioSpec parse(std::istream& in, std::uint64_t default_seed = 0) {
  ScenarioSpec spec;
  spec.seed = default_seed;
  bool have_rates = false, have_n = false, have_variants = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::invalid_input,
           "scenario line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = detail::trim(view.substr(0, eq));
    const auto value = detail::trim(view.substr(eq + 1));
    if (key == "rates") {
      spec.true_rates = detail::to_doubles(value, key);
      have_rates = true;
    } else if (key == "shares") {
      spec.shares = detail::to_doubles(value, key);
    } else if (key == "n") {
      spec.n = detail::to_count(value, key);
      have_n = true;
    } else if (key == "replications") {
      spec.replications = detail::to_count(value, key);
    } else if (key == "seed") {
      spec.seed = detail::to_count(value, key);
    } else if (key == "variants") {
      for (auto part : detail::split(value, ',')) spec.variants.push_back(parse_variant(part));
      have_variants = true;
    } else if (key == "level") {
      spec.level = detail::to_double(value, key);
    } else if (key == "bins") {
      spec.histogram_bins = static_cast<std::size_t>(detail::to_count(value, key));
    } else if (key == "threads") {
      spec.threads = static_cast<unsigned>(detail::to_count(value, key));
    } else {
      fail(ErrorKind::invalid_input, "scenario line " + std::to_string(line_no) +
                                         ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_rates) fail(ErrorKind::invalid_input, "scenario: missing 'rates'");
  if (!have_n) fail(ErrorKind::invalid_input, "scenario: missing 'n'");
  if (!have_variants) spec.variants = {Variant::raw(), Variant::rule(1.0, 0.4)};
  if (spec.shares.empty()) {
    spec.shares.assign(spec.true_rates.size(), 1.0 / static_cast<double>(spec.true_rates.size()));
  }
  spec.validate();
  return spec;
}

}  // namespace dpinfer::scenario

#endif  // DPINFER_SCENARIO_HPP
