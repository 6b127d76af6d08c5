#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sgflow/cli.hpp"
#include "sgflow/errors.hpp"
#include "sgflow/io.hpp"

using namespace sgflow;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sgflow_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const auto path = dir / "config.yaml";
  std::ofstream(path) << body;
  return path;
}

const char* kSmall = R"(nu: 0.1
T: 0.02
grid: {n_r: 32, n_theta: 32}
initial: {h3_norm: 0.1, swirl: 1.0}
output: {snapshot_interval: 0.01}
)";

fs::path only_run_dir(const fs::path& root) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  EXPECT_EQ(dirs.size(), 1u);
  return dirs.empty() ? fs::path() : dirs.front();
}

// Every regular file below dir is manifest.json or listed in the manifest, and vice versa.
void expect_no_orphans(const fs::path& dir, const json& manifest) {
  std::set<std::string> listed;
  for (const auto& f : manifest.at("files")) listed.insert(f.get<std::string>());
  std::set<std::string> present;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) present.insert(fs::relative(e.path(), dir).generic_string());
  present.erase("manifest.json");
  EXPECT_EQ(listed, present);
}

}  // namespace

TEST(Cli, ZeroHorizonRunWritesManifestAndSingleSnapshot) {
  const auto root = scratch("t0");
  const auto cfg = write_config(root, "nu: 0.1\nT: 0\ngrid: {n_r: 32, n_theta: 32}\n");
  CommandFlags flags;
  flags.out = root / "runs";
  flags.quiet = true;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(cfg, flags, out, err), 0) << err.str();
  const auto dir = only_run_dir(root / "runs");
  const auto manifest = json::parse(read_text(dir / "manifest.json"));
  EXPECT_EQ(manifest.at("status").at("exit_code"), 0);
  EXPECT_EQ(manifest.at("states").size(), 1u);
  EXPECT_TRUE(manifest.at("windows").empty());
  EXPECT_EQ(manifest.at("config").at("T").get<double>(), 0.0);
  EXPECT_FALSE(manifest.at("defaults_applied").empty());
  EXPECT_TRUE(manifest.contains("environment"));
  EXPECT_TRUE(manifest.contains("timing"));
  expect_no_orphans(dir, manifest);
  EXPECT_NE(dir.filename().string().find(manifest.at("config_hash").get<std::string>()),
            std::string::npos);
}

TEST(Cli, RunThenReplayChecks) {
  const auto root = scratch("replay");
  const auto cfg = write_config(root, kSmall);
  CommandFlags flags;
  flags.out = root / "runs";
  flags.quiet = true;
  flags.snapshots_every = 2;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(cfg, flags, out, err), 0) << err.str();
  const auto dir = only_run_dir(root / "runs");
  const auto manifest = json::parse(read_text(dir / "manifest.json"));
  // States at t = 0, 0.01, 0.02 with stride 2: index 0 plus the final state.
  ASSERT_EQ(manifest.at("states").size(), 2u);
  EXPECT_EQ(manifest.at("states")[1].at("index"), 2);
  EXPECT_EQ(manifest.at("config").at("output").at("snapshots_every"), 2);
  expect_no_orphans(dir, manifest);

  const auto traj = load_trajectory(dir);
  EXPECT_EQ(traj.states.size(), 2u);
  EXPECT_EQ(steps_csv(traj.steps), read_text(dir / "logs/diagnostics.csv"));
  EXPECT_EQ(traj.windows.size(), manifest.at("windows").size());

  // Two stored states cannot support the weak-form quadrature, so replay reports a failed check.
  std::ostringstream out2, err2;
  EXPECT_EQ(cmd_checks(dir, flags, out2, err2), 3);
  const auto wf = json::parse(read_text(dir / "reports/weak_form.json"));
  EXPECT_FALSE(wf.at("passed").get<bool>());
  EXPECT_NE(wf.at("note").get<std::string>().find("not evaluated"), std::string::npos);
  const auto q1 = json::parse(read_text(dir / "reports/q_L1.json"));
  EXPECT_TRUE(q1.at("passed").get<bool>());
}

TEST(Cli, ErrorsMapToExitCodes) {
  const auto root = scratch("errors");
  CommandFlags flags;
  flags.out = root / "runs";
  flags.quiet = true;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_checks(root / "missing", flags, out, err), 2);
  EXPECT_EQ(cmd_run(root / "missing.yaml", flags, out, err), 2);
  const auto bad = write_config(root, "nu: 0.1\nT: 1\nn: 50\n");
  EXPECT_EQ(cmd_run(bad, flags, out, err), 2);
  EXPECT_NE(err.str().find("n < r_max/2"), std::string::npos);
  EXPECT_FALSE(fs::exists(root / "runs"));
  EXPECT_EQ(exit_code_for(SupportOverflowError("x")), 4);
  EXPECT_EQ(exit_code_for(PicardError("x", {})), 5);
  EXPECT_EQ(exit_code_for(EllipticError("x")), 6);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}

TEST(Cli, ValidateOnCoarseGridPasses) {
  const auto root = scratch("validate");
  const auto cfg = write_config(root, "nu: 0.1\nT: 0\ngrid: {n_r: 32, n_theta: 32}\n");
  CommandFlags flags;
  flags.out = root / "runs";
  flags.quiet = true;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(cfg, flags, out, err), 0) << err.str();
  const auto dir = only_run_dir(root / "runs");
  const auto rep = json::parse(read_text(dir / "reports/validation.json"));
  EXPECT_TRUE(rep.at("passed").get<bool>());
}
