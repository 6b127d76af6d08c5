#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgflow/diagnostics.hpp"
#include "sgflow/driver.hpp"

namespace sgflow {

struct CommandFlags {
  std::optional<std::filesystem::path> out;  // output root; RUN_ROOT or ./runs otherwise
  std::optional<int> snapshots_every;        // overrides output.snapshots_every
  std::optional<std::uint64_t> seed;         // overrides the config seed
  bool quiet = false;
  std::vector<double> n_list{4.0, 8.0, 16.0};  // cmd_family only
};

// Exit status for an exception escaping a command: the Error class code, 2 for argument and
// filesystem errors, 1 otherwise.
int exit_code_for(const std::exception& e);

// Creates <root>/<UTC timestamp>_<config hash>, adding a numeric suffix on collision.
std::filesystem::path make_run_dir(const SolverConfig& cfg, const CommandFlags& flags);

// Diagnostics applied to a finished trajectory: q L1/L2, support, q H1 transport, energy,
// weak form (canonical fields plus one seeded off-centre bump) and H3 recovery. A check that
// cannot be evaluated on the stored data is reported as degenerate and failed, with a note.
std::vector<EstimateReport> run_check_suite(const Trajectory& traj);

// Rebuilds a trajectory (config, grid, step log and stored states) from a run directory.
Trajectory load_trajectory(const std::filesystem::path& run_dir);

// Each command returns the process exit status. Progress and tables go to `out`, errors to
// `err`. cmd_run and cmd_family write a manifest.json even when the computation fails.
int cmd_run(const std::filesystem::path& config, const CommandFlags& flags, std::ostream& out,
            std::ostream& err);
int cmd_family(const std::filesystem::path& config, const CommandFlags& flags, std::ostream& out,
               std::ostream& err);
// Replays the check suite on a stored run directory and rewrites its reports.
int cmd_checks(const std::filesystem::path& run_dir, const CommandFlags& flags, std::ostream& out,
               std::ostream& err);
// Manufactured-solution order studies and the harmonic kernel check on the configured grid.
int cmd_validate(const std::filesystem::path& config, const CommandFlags& flags,
                 std::ostream& out, std::ostream& err);

}  // namespace sgflow
