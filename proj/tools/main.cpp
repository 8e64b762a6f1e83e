// dpinfer: inference on the demographic parity ratio from the command line.
//
//   dpinfer estimate  data.csv [--alpha X | --alpha-rule c,q] [--level L] [--raw]
//   dpinfer test-eeoc data.csv [same flags]
//   dpinfer ab-test   a.csv b.csv [--sided two|one] [same flags]
//   dpinfer crossfit  units.csv [--k K] [--seed S]
//   dpinfer mle       censored.csv [same flags]
//   dpinfer simulate  scenario.txt [--seed S] [--threads T] [--histogram-csv out.csv]
//
// Reports are JSON on stdout. Exit codes: 0 ok, 2 input error,
// 3 estimand undefined, 4 test undefined.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using dpinfer::cli::EstimateOptions;

void add_estimate_flags(CLI::App* cmd, EstimateOptions& opt, std::string& layout) {
  cmd->add_option("--alpha", opt.alpha, "Fixed smoothing sharpness alpha > 0");
  cmd->add_option("--alpha-rule", opt.alpha_rule, "Rule alpha = c * N^q given as 'c,q' (q < 1/2)");
  cmd->add_option("--level", opt.level, "Confidence level")->capture_default_str();
  cmd->add_flag("--raw", opt.raw, "Use the hard min/max ratio instead of the smooth one");
  cmd->add_flag("--continuity-correction", opt.continuity_correction,
                "Use (x + 0.5) / (n + 1) in per-group variances");
  auto* unit = cmd->add_flag_callback("--unit", [&layout] { layout = "unit"; },
                                      "Input is unit-level: group,outcome");
  auto* agg = cmd->add_flag_callback("--aggregate", [&layout] { layout = "aggregate"; },
                                     "Input is aggregated: group,successes,trials");
  unit->excludes(agg);
}

std::optional<dpinfer::csv::Layout> layout_from(const std::string& layout) {
  if (layout == "unit") return dpinfer::csv::Layout::unit;
  if (layout == "aggregate") return dpinfer::csv::Layout::aggregate;
  return std::nullopt;
}

void emit(const dpinfer::report::json& js) { std::cout << js.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inference on the demographic parity (min-over-max) ratio"};
  app.require_subcommand(1);

  EstimateOptions opt;
  std::string layout;
  std::string file, file_b, sided = "two", histogram_out;
  std::size_t k = 5;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  auto* estimate = app.add_subcommand("estimate", "DP point estimate, standard error and CI");
  estimate->add_option("file", file, "CSV input")->required();
  add_estimate_flags(estimate, opt, layout);

  auto* eeoc = app.add_subcommand("test-eeoc", "One-sided test of DP < 0.8");
  eeoc->add_option("file", file, "CSV input")->required();
  add_estimate_flags(eeoc, opt, layout);

  auto* ab = app.add_subcommand("ab-test", "Compare DP between variants A and B");
  ab->add_option("file_a", file, "CSV input for variant A")->required();
  ab->add_option("file_b", file_b, "CSV input for variant B")->required();
  ab->add_option("--sided", sided, "'two' or 'one' (H1: DP_B > DP_A)")
      ->check(CLI::IsMember({"two", "one"}))
      ->capture_default_str();
  add_estimate_flags(ab, opt, layout);

  auto* crossfit = app.add_subcommand("crossfit", "K-fold cross-fitted DP estimate");
  crossfit->add_option("file", file, "Unit-level CSV input")->required();
  crossfit->add_option("--k", k, "Number of folds")->capture_default_str();
  crossfit->add_option("--seed", seed, "Fold assignment seed (default: DPINFER_SEED or 0)");

  auto* mle = app.add_subcommand("mle", "Censored-outcome MLE per group, then DP inference");
  mle->add_option("file", file, "CSV input: group,applications,hired")->required();
  std::string unused_layout;
  add_estimate_flags(mle, opt, unused_layout);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo sampling distribution of DP");
  simulate->add_option("scenario", file, "Scenario file (key = value)")->required();
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");
  simulate->add_option("--histogram-csv", histogram_out, "Also write histogram bins here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return dpinfer::cli::kInputError;
  }

  try {
    const auto forced = layout_from(layout);
    opt.layout = forced;
    if (estimate->parsed()) {
      emit(dpinfer::cli::cmd_estimate(file, opt));
    } else if (eeoc->parsed()) {
      emit(dpinfer::cli::cmd_test_eeoc(file, opt));
    } else if (ab->parsed()) {
      emit(dpinfer::cli::cmd_ab(file, file_b, opt,
                                sided == "two" ? dpinfer::Sided::two : dpinfer::Sided::one_b_gt_a));
    } else if (crossfit->parsed()) {
      emit(dpinfer::cli::cmd_crossfit(file, k, seed ? *seed : dpinfer::cli::env_seed(0)));
    } else if (mle->parsed()) {
      emit(dpinfer::cli::cmd_mle(file, opt));
    } else if (simulate->parsed()) {
      auto result = dpinfer::cli::cmd_simulate(file, seed, threads);
      if (!histogram_out.empty()) {
        std::ofstream out(histogram_out, std::ios::binary);
        if (!out) {
          dpinfer::fail(dpinfer::ErrorKind::invalid_input,
                        "cannot write '" + histogram_out + "'");
        }
        out << result.histogram_csv;
      }
      emit(result.summary);
    }
  } catch (const dpinfer::Error& e) {
    std::cerr << "error (" << dpinfer::to_string(e.kind()) << "): " << e.what() << '\n';
    return dpinfer::cli::exit_code_for(e.kind());
  }
  return dpinfer::cli::kOk;
}
