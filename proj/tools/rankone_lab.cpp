#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "rankone/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rank-one perturbation laboratory"};
  app.set_version_flag("--version", rankone::kToolVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute a scenario file");
  std::string config;
  std::string out;
  rankone::RunOptions opt;
  run->add_option("scenario", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory (overrides the scenario's output_dir)");
  run->add_option("--threads", opt.threads, "OpenMP threads")->check(CLI::NonNegativeNumber);
  run->add_option("--tol-scale", opt.tol_scale, "global tolerance multiplier")->check(CLI::PositiveNumber);
  run->add_option("--seed", opt.seed, "seed for randomized scenarios");

  auto* ops = app.add_subcommand("ops", "list scenario operations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (ops->parsed()) {
    for (const auto& name : rankone::scenario_operations()) std::cout << name << "\n";
    return 0;
  }

  if (!out.empty()) opt.out_dir = out;
  const rankone::RunResult res = rankone::run_scenario(config, opt);
  for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
    const auto& o = res.outcomes[i];
    std::printf("[%02zu] %-28s %s  %.3fs\n", i, o.op.c_str(), o.ok ? "ok  " : "FAIL", o.wall_seconds);
  }
  for (const auto& d : res.diagnostics) std::fprintf(stderr, "%s\n", d.c_str());
  return res.exit_code;
}
