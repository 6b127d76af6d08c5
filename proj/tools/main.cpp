#include <CLI11.hpp>

#include <iostream>

#include "sgflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Second-grade fluid outside the unit disk: runs, cutoff families, checks"};
  app.require_subcommand(1);

  sgflow::CommandFlags flags;
  std::string out_dir;
  int snapshots_every = 0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output root (default: $RUN_ROOT or ./runs)");
    cmd->add_option("--snapshots-every", snapshots_every, "Write every K-th stored state")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Seed for randomized diagnostic samples");
    cmd->add_flag("--quiet", flags.quiet, "Suppress progress and tables");
  };

  std::string config;
  std::string run_dir;
  auto* run = app.add_subcommand("run", "Single simulation with the diagnostics suite");
  run->add_option("--config", config, "Configuration file")->required();
  add_common(run);

  auto* family = app.add_subcommand("family", "Runs for several cutoff scales and compares them");
  family->add_option("--config", config, "Configuration file")->required();
  family->add_option("--n", flags.n_list, "Cutoff scales, strictly increasing")
      ->capture_default_str();
  add_common(family);

  auto* checks = app.add_subcommand("checks", "Replays the diagnostics on a stored run");
  checks->add_option("run_dir", run_dir, "Run directory")->required();
  add_common(checks);

  auto* validate = app.add_subcommand("validate", "Manufactured-solution and kernel checks");
  validate->add_option("--config", config, "Configuration file (grid section is used)")
      ->required();
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto* cmd : {run, family, checks, validate}) {
    if (!cmd->parsed()) continue;
    if (cmd->count("--out")) flags.out = out_dir;
    if (cmd->count("--snapshots-every")) flags.snapshots_every = snapshots_every;
    if (cmd->count("--seed")) flags.seed = seed;
  }

  if (run->parsed()) return sgflow::cmd_run(config, flags, std::cout, std::cerr);
  if (family->parsed()) return sgflow::cmd_family(config, flags, std::cout, std::cerr);
  if (checks->parsed()) return sgflow::cmd_checks(run_dir, flags, std::cout, std::cerr);
  return sgflow::cmd_validate(config, flags, std::cout, std::cerr);
}
