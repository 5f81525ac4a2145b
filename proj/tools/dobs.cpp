#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dobs/cli.hpp"

// dobs: decide, construct, and verify distributed state observers for
// discrete-time LTI plants over a fixed communication graph.

int main(int argc, char** argv) {
  CLI::App app{"distributed observer synthesis toolkit"};
  app.require_subcommand(1);

  dobs::cli::GlobalOptions opts;
  app.add_option("--tol-rank", opts.tol_rank, "relative singular value threshold for rank decisions");
  app.add_option("--tol-eig", opts.tol_eig, "eigenvalue separation tolerance");
  app.add_option("--seed", opts.seed, "master seed for every randomized construction");
  app.add_option("--mu", opts.mu, "augmented-state dimension for every observer");
  app.add_option("--nu", opts.nu, "controller internal-state dimension for every vertex");
  app.add_option("--restarts", opts.restarts, "pattern-search restarts");
  app.add_option("--max-iters", opts.max_iters, "objective evaluations per restart");
  app.add_flag("--force", opts.force, "run synthesis even when the condition fails");

  std::string problem, solution, output, csv, config;
  long horizon = 200;

  auto* analyze = app.add_subcommand("analyze", "source components and the detectability condition");
  analyze->add_option("problem", problem, "problem file")->required();

  auto* synthesize = app.add_subcommand("synthesize", "construct weights and observer gains");
  synthesize->add_option("problem", problem, "problem file")->required();
  synthesize->add_option("-o,--out", output, "solution file to write")->required();

  auto* simulate = app.add_subcommand("simulate", "run the observer network and export a CSV trace");
  simulate->add_option("problem", problem, "problem file")->required();
  simulate->add_option("solution", solution, "solution file")->required();
  simulate->add_option("--horizon", horizon, "number of steps");
  simulate->add_option("--csv", csv, "trace output path")->required();

  auto* control = app.add_subcommand("control", "full distributed stabilization pipeline");
  control->add_option("problem", problem, "problem file (with input blocks)")->required();
  control->add_option("-o,--out", output, "solution file to write")->required();

  auto* verify = app.add_subcommand("verify", "recompute the certificates stored in a solution");
  verify->add_option("problem", problem, "problem file")->required();
  verify->add_option("solution", solution, "solution file")->required();

  auto* campaign = app.add_subcommand("campaign", "randomized verification campaigns");
  campaign->add_option("config", config, "campaign config file")->required();
  campaign->add_option("-o,--out", output, "JSON summary path ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) return dobs::cli::cmd_analyze(problem, opts, std::cout, std::cerr);
  if (synthesize->parsed())
    return dobs::cli::cmd_synthesize(problem, output, opts, std::cout, std::cerr);
  if (simulate->parsed())
    return dobs::cli::cmd_simulate(problem, solution, horizon, csv, opts, std::cout, std::cerr);
  if (control->parsed()) return dobs::cli::cmd_control(problem, output, opts, std::cout, std::cerr);
  if (verify->parsed()) return dobs::cli::cmd_verify(problem, solution, opts, std::cout, std::cerr);
  if (campaign->parsed()) return dobs::cli::cmd_campaign(config, output, opts, std::cout, std::cerr);
  return 1;
}
