#ifndef DPINFER_TOOLS_COMMANDS_HPP
#define DPINFER_TOOLS_COMMANDS_HPP

// Subcommand bodies for the dpinfer CLI. Each returns the JSON report and
// throws dpinfer::Error on failure; main() maps errors to exit codes.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dpinfer/censored_mle.hpp"
#include "dpinfer/crossfit.hpp"
#include "dpinfer/csv.hpp"
#include "dpinfer/data_model.hpp"
#include "dpinfer/error.hpp"
#include "dpinfer/inference.hpp"
#include "dpinfer/propagation.hpp"
#include "dpinfer/report.hpp"
#include "dpinfer/scenario.hpp"
#include "dpinfer/simlab.hpp"

namespace dpinfer::cli {

using report::json;

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kEstimandUndefined = 3,
  kTestUndefined = 4,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input:
    case ErrorKind::domain: return kInputError;
    case ErrorKind::undefined_dp:
    case ErrorKind::inference_unavailable: return kEstimandUndefined;
    case ErrorKind::test_undefined: return kTestUndefined;
  }
  return kInputError;
}

struct EstimateOptions {
  std::optional<csv::Layout> layout;  // empty: detect from header
  std::optional<double> alpha;
  std::optional<std::string> alpha_rule;  // "c,q"
  double level = 0.95;
  bool raw = false;
  bool continuity_correction = false;
};

inline SmoothingConfig smoothing_from(const EstimateOptions& opt) {
  if (opt.alpha && opt.alpha_rule) {
    fail(ErrorKind::invalid_input, "--alpha and --alpha-rule are mutually exclusive");
  }
  if (opt.alpha) return SmoothingConfig::fixed(*opt.alpha);
  if (opt.alpha_rule) {
    const auto comma = opt.alpha_rule->find(',');
    if (comma == std::string::npos) {
      fail(ErrorKind::invalid_input, "--alpha-rule expects 'c,q', got '" + *opt.alpha_rule + "'");
    }
    try {
      std::size_t used_c = 0, used_q = 0;
      const std::string c_text = opt.alpha_rule->substr(0, comma);
      const std::string q_text = opt.alpha_rule->substr(comma + 1);
      const double c = std::stod(c_text, &used_c);
      const double q = std::stod(q_text, &used_q);
      if (used_c != c_text.size() || used_q != q_text.size()) throw std::invalid_argument("");
      return SmoothingConfig::rule(c, q);
    } catch (const std::logic_error&) {
      fail(ErrorKind::invalid_input, "--alpha-rule expects 'c,q', got '" + *opt.alpha_rule + "'");
    }
  }
  return SmoothingConfig::default_rule();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::invalid_input, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::uint64_t env_seed(std::uint64_t fallback = 0) {
  const char* v = std::getenv("DPINFER_SEED");
  if (v == nullptr || *v == '\0') return fallback;
  try {
    std::size_t used = 0;
    const auto seed = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument("");
    return seed;
  } catch (const std::logic_error&) {
    fail(ErrorKind::invalid_input, std::string("DPINFER_SEED is not an unsigned integer: ") + v);
  }
}

struct LoadedCounts {
  json input;
  GroupedCounts counts;
};

inline csv::Layout resolve_layout(const std::string& text, std::optional<csv::Layout> forced,
                                  const std::string& path) {
  if (forced) return *forced;
  const auto header = csv::peek_header(text);
  if (header.empty()) fail(ErrorKind::invalid_input, "'" + path + "' is empty");
  if (auto detected = csv::detect_layout(header)) return *detected;
  fail(ErrorKind::invalid_input, "'" + path +
                                     "': unrecognised header; expected 'group,outcome' or "
                                     "'group,successes,trials'");
}

inline json input_digest(const std::string& path, csv::Layout layout, std::size_t rows,
                         const std::string& text) {
  return {{"path", path},
          {"layout", csv::to_string(layout)},
          {"rows", rows},
          {"fnv1a64", report::hex64(report::fnv1a64(text))}};
}

inline LoadedCounts load_counts(const std::string& path, std::optional<csv::Layout> forced) {
  const auto text = read_file(path);
  const auto layout = resolve_layout(text, forced, path);
  std::istringstream in(text);
  try {
    switch (layout) {
      case csv::Layout::unit: {
        const auto units = csv::read_units(in);
        return {input_digest(path, layout, units.size(), text), aggregate(units)};
      }
      case csv::Layout::aggregate: {
        auto counts = csv::read_aggregate(in);
        return {input_digest(path, layout, counts.size(), text), std::move(counts)};
      }
      case csv::Layout::censored:
        fail(ErrorKind::invalid_input,
             "'" + path + "' is a censored file; use the 'mle' subcommand");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_input) {
      fail(ErrorKind::invalid_input, "'" + path + "': " + e.what());
    }
    throw;
  }
  fail(ErrorKind::invalid_input, "unsupported layout");
}

struct Analysis {
  json input;
  MeansWithCovariance means;
  DpEstimate estimate;
  ConfidenceInterval ci;
};

inline Analysis analyze(const std::string& path, const EstimateOptions& opt,
                        const SmoothingConfig& cfg) {
  auto loaded = load_counts(path, opt.layout);
  Analysis a;
  a.input = std::move(loaded.input);
  a.means = estimate_means(loaded.counts, {opt.continuity_correction});
  a.estimate = estimate_dp(a.means, cfg, opt.raw ? Estimand::raw : Estimand::smooth);
  a.ci = confidence_interval(a.estimate, opt.level);
  return a;
}

inline json config_echo(const EstimateOptions& opt, const SmoothingConfig& cfg,
                        std::optional<double> alpha_resolved) {
  return {{"estimand", opt.raw ? "raw" : "smooth"},
          {"smoothing", opt.raw ? json(nullptr) : report::to_json(cfg)},
          {"alpha_resolved", alpha_resolved ? json(*alpha_resolved) : json(nullptr)},
          {"level", opt.level},
          {"continuity_correction", opt.continuity_correction}};
}

inline json analysis_block(const Analysis& a) {
  return {{"groups", report::to_json(a.means)},
          {"estimate", report::to_json(a.estimate)},
          {"estimand_gap", report::estimand_gap(a.estimate, a.means)},
          {"confidence_interval", report::to_json(a.ci)}};
}

inline Diagnostics all_diagnostics(const Analysis& a) {
  Diagnostics d = a.estimate.diagnostics;
  append(d, a.ci.diagnostics);
  return d;
}

inline json cmd_estimate(const std::string& path, const EstimateOptions& opt) {
  const auto cfg = smoothing_from(opt);
  const auto a = analyze(path, opt, cfg);
  json out = {{"command", "estimate"},
              {"inputs", json::array({a.input})},
              {"config", config_echo(opt, cfg, a.estimate.alpha_used)}};
  out.update(analysis_block(a));
  out["diagnostics"] = report::to_json(all_diagnostics(a));
  return out;
}

inline json cmd_test_eeoc(const std::string& path, const EstimateOptions& opt) {
  const auto cfg = smoothing_from(opt);
  const auto a = analyze(path, opt, cfg);
  const auto test = test_eeoc(a.estimate);
  json out = {{"command", "test-eeoc"},
              {"inputs", json::array({a.input})},
              {"config", config_echo(opt, cfg, a.estimate.alpha_used)}};
  out.update(analysis_block(a));
  out["tests"] = json::array({report::to_json(test)});
  out["diagnostics"] = report::to_json(all_diagnostics(a));
  return out;
}

inline json cmd_ab(const std::string& path_a, const std::string& path_b,
                   const EstimateOptions& opt, Sided sided) {
  const auto cfg = smoothing_from(opt);
  const auto a = analyze(path_a, opt, cfg);
  const auto b = analyze(path_b, opt, cfg);
  const auto test = test_ab(a.estimate, b.estimate, sided);
  Diagnostics diags;
  for (auto d : all_diagnostics(a)) {
    d.message = "A: " + d.message;
    diags.push_back(std::move(d));
  }
  for (auto d : all_diagnostics(b)) {
    d.message = "B: " + d.message;
    diags.push_back(std::move(d));
  }
  json config = config_echo(opt, cfg, std::nullopt);
  config.erase("alpha_resolved");
  config["alpha_resolved_a"] = a.estimate.alpha_used ? json(*a.estimate.alpha_used) : json(nullptr);
  config["alpha_resolved_b"] = b.estimate.alpha_used ? json(*b.estimate.alpha_used) : json(nullptr);
  config["sided"] = sided == Sided::two ? "two" : "one";
  return {{"command", "ab-test"},
          {"inputs", json::array({a.input, b.input})},
          {"config", config},
          {"variant_a", analysis_block(a)},
          {"variant_b", analysis_block(b)},
          {"tests", json::array({report::to_json(test)})},
          {"diagnostics", report::to_json(diags)}};
}

inline json cmd_crossfit(const std::string& path, std::size_t k, std::uint64_t seed) {
  const auto text = read_file(path);
  const auto layout = resolve_layout(text, csv::Layout::unit, path);
  std::istringstream in(text);
  std::vector<UnitRecord> units;
  try {
    units = csv::read_units(in);
  } catch (const Error& e) {
    fail(e.kind(), "'" + path + "': " + e.what());
  }
  const auto result = crossfit_dp(units, {k, seed});
  const auto pooled = estimate_means(aggregate(units));
  Diagnostics diags = pooled.diagnostics;
  diags.push_back({"heuristic_se", "cross-fitted standard error is a heuristic without "
                                   "asymptotic justification; no interval is reported"});
  json raw = nullptr;
  if (*std::max_element(pooled.s_hat.begin(), pooled.s_hat.end()) > 0.0) {
    raw = report::number(*std::min_element(pooled.s_hat.begin(), pooled.s_hat.end()) /
                         *std::max_element(pooled.s_hat.begin(), pooled.s_hat.end()));
  }
  return {{"command", "crossfit"},
          {"inputs", json::array({input_digest(path, layout, units.size(), text)})},
          {"config", {{"k", k}, {"seed", seed}}},
          {"groups", report::to_json(pooled)},
          {"pooled_raw_dp", raw},
          {"crossfit", report::to_json(result)},
          {"diagnostics", report::to_json(diags)}};
}

inline json cmd_mle(const std::string& path, const EstimateOptions& opt) {
  const auto cfg = smoothing_from(opt);
  const auto text = read_file(path);
  std::istringstream in(text);
  std::vector<CensoredRecord> records;
  try {
    records = csv::read_censored(in);
  } catch (const Error& e) {
    fail(e.kind(), "'" + path + "': " + e.what());
  }
  const auto fits = fit_censored_groups(records);
  json fit_json = json::array();
  Diagnostics diags;
  for (const auto& f : fits) {
    fit_json.push_back(report::to_json(f));
    if (f.boundary != MleBoundary::none) {
      diags.push_back({"boundary_mle", "group '" + f.label + "' has a boundary MLE at the " +
                                           to_string(f.boundary) + " edge; se undefined"});
    }
  }
  json out = {{"command", "mle"},
              {"inputs", json::array({input_digest(path, csv::Layout::censored, records.size(),
                                                   text)})},
              {"fits", fit_json}};
  const auto shares = censored_shares(fits);
  const auto means = censored_means(fits, shares, records.size());
  const auto est = estimate_dp(means, cfg, opt.raw ? Estimand::raw : Estimand::smooth);
  const auto ci = confidence_interval(est, opt.level);
  append(diags, est.diagnostics);
  append(diags, ci.diagnostics);
  out["config"] = config_echo(opt, cfg, est.alpha_used);
  out["groups"] = report::to_json(means);
  out["estimate"] = report::to_json(est);
  out["estimand_gap"] = report::estimand_gap(est, means);
  out["confidence_interval"] = report::to_json(ci);
  out["diagnostics"] = report::to_json(diags);
  return out;
}

struct SimulateResult {
  json summary;
  std::string histogram_csv;
};

inline SimulateResult cmd_simulate(const std::string& path, std::optional<std::uint64_t> seed,
                                   std::optional<unsigned> threads) {
  const auto text = read_file(path);
  std::istringstream in(text);
  auto spec = scenario::parse(in, env_seed(0));
  if (seed) spec.seed = *seed;
  if (threads) spec.threads = *threads;
  const auto summary = simulate(spec);
  auto js = report::to_json(summary, spec);
  js["inputs"] = json::array({{{"path", path},
                               {"layout", "scenario"},
                               {"fnv1a64", report::hex64(report::fnv1a64(text))}}});
  return {std::move(js), report::histogram_csv(summary)};
}

}  // namespace dpinfer::cli

#endif  // DPINFER_TOOLS_COMMANDS_HPP
