#pragma once

// Command-line front end: argument parsing and exit codes.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "banach_fbs/experiment.hpp"

namespace bfbs::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kSolverFailure = 3 };

/// Config and input errors map to 2, everything raised while solving or
/// writing results to 3.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kConfigError;
  if (dynamic_cast<const DomainError*>(&e) != nullptr) return kConfigError;
  return kSolverFailure;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Forward-backward splitting in Banach spaces", "banach-fbs"};
  app.require_subcommand(1);

  std::string config;
  int jobs = 1;
  auto* sparse = app.add_subcommand("sparse-demo", "Sparse spike recovery for the integration operator");
  sparse->add_option("--config", config, "Config file")->required();
  sparse->add_option("--jobs", jobs, "Parallel solves, one per p value")->check(CLI::PositiveNumber);

  auto* tv = app.add_subcommand("tv", "Total-variation denoising or deblurring on a grid");
  tv->add_option("--config", config, "Config file")->required();

  std::string history, table = "rate.table";
  double ref = 0.0, p = 2.0;
  long burn_in = 0;
  auto* diag = app.add_subcommand("diagnose", "Convergence-rate fit of a history CSV");
  diag->add_option("--history", history, "history.csv from a run")->required();
  diag->add_option("--ref", ref, "Reference (minimal) objective")->required();
  diag->add_option("--p", p, "Exponent p of the run")->required();
  diag->add_option("--burn-in", burn_in, "Ignore records with n <= burn-in");
  diag->add_option("--out", table, "Output table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (*sparse) {
      const auto cfg = SparseDemoConfig::from(Config::load(config));
      cmd_sparse_demo(cfg, jobs, &out);
      out << "wrote " << (cfg.output_dir / "summary.csv").string() << '\n';
    } else if (*tv) {
      const auto cfg = TvConfig::from(Config::load(config));
      cmd_tv(cfg, &out);
      out << "wrote " << (cfg.output_dir / "summary.csv").string() << '\n';
    } else {
      const RateFit fit = cmd_diagnose(history, ref, p, burn_in, table);
      out << "C = " << fit.C << "\nslope = " << fit.slope << "\ntheoretical slope bound = "
          << -(p - 1.0) << "\nwrote " << table << '\n';
    }
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << (code == kConfigError ? "config error: " : "solver failure: ") << e.what() << '\n';
    return code;
  }
  return kSuccess;
}

}  // namespace bfbs::cli
