#include "sgflow/cli.hpp"

#include <unistd.h>

#include <chrono>
#include <memory>
#include <optional>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <stdexcept>

#include "sgflow/errors.hpp"
#include "sgflow/io.hpp"
#include "sgflow/validation.hpp"

#ifndef SGFLOW_VERSION
#define SGFLOW_VERSION "unknown"
#endif

namespace sgflow {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return static_cast<int>(err->code());
  if (dynamic_cast<const std::invalid_argument*>(&e)) return static_cast<int>(ExitCode::config);
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return static_cast<int>(ExitCode::config);
  return 1;
}

namespace {

std::string utc_stamp(std::chrono::system_clock::time_point tp, const char* format) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

fs::path output_root(const CommandFlags& flags) {
  if (flags.out) return *flags.out;
  if (const char* env = std::getenv("RUN_ROOT"); env && *env) return env;
  return "runs";
}

SolverConfig load_config(const fs::path& path, const CommandFlags& flags) {
  SolverConfig cfg = parse_config(path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.snapshots_every) cfg.output.snapshots_every = *flags.snapshots_every;
  validate(cfg);
  return cfg;
}

json environment_json() {
  char host[256] = {0};
  if (gethostname(host, sizeof host - 1) != 0) host[0] = '\0';
  return {{"sgflow_version", SGFLOW_VERSION},
          {"compiler", __VERSION__},
          {"cplusplus", static_cast<long>(__cplusplus)},
          {"hostname", host}};
}

json grid_json(const SolverConfig& cfg) {
  return {{"n_r", cfg.grid.n_r},
          {"n_theta", cfg.grid.n_theta},
          {"r_max", cfg.grid.r_max},
          {"stretch", cfg.grid.stretch}};
}

json params_json(const FixedPointParams& p) {
  return {{"M", p.M},         {"T0", p.T0},         {"R", p.R},
          {"C_T", p.C_T},     {"q_norm", p.q_norm}, {"u_h3", p.u_h3},
          {"degenerate", p.degenerate}};
}

json window_json(const WindowRecord& w) {
  return {{"index", w.index},
          {"t_start", w.t_start},
          {"h", w.h},
          {"slices", w.slices},
          {"iterations", w.iterations},
          {"contraction_estimate", w.contraction_estimate},
          {"differences", w.differences},
          {"identity_error", w.identity_error},
          {"max_elliptic_residual", w.max_elliptic_residual},
          {"sup_h3", w.sup_h3},
          {"M", w.params.M},
          {"T0", w.params.T0},
          {"within_ball", w.sup_h3 <= w.params.M}};
}

WindowRecord window_from_json(const json& j) {
  WindowRecord w;
  w.index = j.at("index").get<int>();
  w.t_start = j.at("t_start").get<double>();
  w.h = j.at("h").get<double>();
  w.slices = j.at("slices").get<int>();
  w.iterations = j.at("iterations").get<int>();
  w.contraction_estimate = j.at("contraction_estimate").get<double>();
  w.differences = j.at("differences").get<std::vector<double>>();
  w.identity_error = j.at("identity_error").get<double>();
  w.max_elliptic_residual = j.at("max_elliptic_residual").get<double>();
  w.sup_h3 = j.at("sup_h3").get<double>();
  w.params.M = j.at("M").get<double>();
  w.params.T0 = j.at("T0").get<double>();
  return w;
}

std::string state_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "states/%04d", index);
  return buf;
}

// Writes snapshots at the configured stride as they are produced and keeps the step log, so
// a failed run still leaves its partial output behind.
class RunWriter : public RunObserver {
 public:
  RunWriter(fs::path dir, int stride, bool quiet, std::ostream& out)
      : dir_(std::move(dir)), stride_(std::max(stride, 1)), quiet_(quiet), out_(out) {}

  void on_state(const FlowState& st) override {
    if (count_ % stride_ == 0) {
      write(st, count_);
      last_.reset();
    } else {
      last_ = st;
      last_index_ = count_;
    }
    ++count_;
  }
  void on_step(const StepRecord& s) override { steps_.push_back(s); }
  void on_window(const WindowRecord& w) override {
    windows_.push_back(w);
    if (!quiet_ && w.index % 100 == 0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "window %d  t = %.6g  h = %.3g  iterations %d  ratio %.3g\n",
                    w.index, w.t_start, w.h, w.iterations, w.contraction_estimate);
      out_ << buf << std::flush;
    }
  }

  // Writes the final state when the stride skipped it.
  void finish() {
    if (last_) write(*last_, last_index_);
    last_.reset();
  }

  const std::vector<StepRecord>& steps() const { return steps_; }
  const std::vector<WindowRecord>& windows() const { return windows_; }
  const json& states() const { return states_; }
  const std::vector<std::string>& files() const { return files_; }
  void add_file(std::string f) { files_.push_back(std::move(f)); }

 private:
  void write(const FlowState& st, int index) {
    const std::string stem = state_stem(index);
    write_state(st, dir_ / stem);
    states_.push_back({{"index", index}, {"t", st.t}, {"csv", stem + ".csv"}, {"json", stem + ".json"}});
    files_.push_back(stem + ".csv");
    files_.push_back(stem + ".json");
  }

  fs::path dir_;
  int stride_;
  bool quiet_;
  std::ostream& out_;
  int count_ = 0;
  std::optional<FlowState> last_;
  int last_index_ = 0;
  std::vector<StepRecord> steps_;
  std::vector<WindowRecord> windows_;
  json states_ = json::array();
  std::vector<std::string> files_;
};

EstimateReport skipped(const std::string& name, const std::exception& e) {
  EstimateReport r;
  r.name = name;
  r.degenerate = true;
  r.passed = false;
  r.note = std::string("not evaluated: ") + e.what();
  return r;
}

template <class F>
EstimateReport guarded(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    return skipped(name, e);
  } catch (const std::out_of_range& e) {
    return skipped(name, e);
  }
}

// Writes reports/<name>.json and reports/summary.csv; returns the relative paths.
std::vector<std::string> write_reports(const fs::path& dir,
                                       const std::vector<EstimateReport>& reports) {
  std::vector<std::string> files;
  for (const auto& r : reports) {
    const std::string rel = "reports/" + r.name + ".json";
    write_text_atomic(dir / rel, report_json(r) + "\n");
    files.push_back(rel);
  }
  write_text_atomic(dir / "reports/summary.csv", summary_csv(reports));
  files.push_back("reports/summary.csv");
  return files;
}

json reports_status(const std::vector<EstimateReport>& reports) {
  json j = json::object();
  for (const auto& r : reports)
    j[r.name] = {{"passed", r.passed}, {"degenerate", r.degenerate},
                 {"measured_constant", std::isfinite(r.measured_constant) ? json(r.measured_constant)
                                                                          : json("inf")}};
  return j;
}

struct Clock {
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
  std::chrono::steady_clock::time_point steady = std::chrono::steady_clock::now();

  json finish() const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - steady).count();
    return {{"started", utc_stamp(started, "%Y-%m-%dT%H:%M:%SZ")},
            {"finished", utc_stamp(std::chrono::system_clock::now(), "%Y-%m-%dT%H:%M:%SZ")},
            {"wall_seconds", secs}};
  }
};

json status_json(int code, const std::string& error) {
  json j{{"exit_code", code}, {"ok", code == 0}};
  if (!error.empty()) j["error"] = error;
  return j;
}

}  // namespace

fs::path make_run_dir(const SolverConfig& cfg, const CommandFlags& flags) {
  const fs::path root = output_root(flags);
  const std::string base =
      utc_stamp(std::chrono::system_clock::now(), "%Y%m%dT%H%M%SZ") + "_" + config_hash(cfg);
  fs::create_directories(root);
  for (int k = 0;; ++k) {
    const fs::path dir = root / (k == 0 ? base : base + "-" + std::to_string(k));
    if (fs::create_directory(dir)) return dir;
  }
}

std::vector<EstimateReport> run_check_suite(const Trajectory& traj) {
  std::vector<EstimateReport> out;
  out.push_back(guarded("q_L1", [&] { return check_q_lp(traj, 1); }));
  out.push_back(guarded("q_L2", [&] { return check_q_lp(traj, 2); }));
  out.push_back(guarded("support", [&] { return check_support(traj); }));
  out.push_back(guarded("q_H1_transport", [&] { return check_hs_transport(traj, 1); }));
  out.push_back(guarded("energy", [&] { return check_energy(traj); }));
  out.push_back(guarded("weak_form", [&] {
    auto fields = canonical_test_fields(traj.config.T);
    // One extra field at a seeded position inside the band the canonical fields occupy.
    std::mt19937_64 rng(traj.config.seed);
    std::uniform_real_distribution<double> radius(2.3, 2.7);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double rc = radius(rng);
    fields.push_back(offcentre_test_field("seeded_bump", rc, angle(rng), traj.config.T));
    return check_weak_form(traj, fields);
  }));
  out.push_back(guarded("h3_recovery", [&] {
    if (traj.states.empty()) throw std::invalid_argument("no stored state");
    return check_h3_recovery(traj.states.back());
  }));
  return out;
}

Trajectory load_trajectory(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir))
    throw ConfigError("run directory " + run_dir.string() + " does not exist");
  const json manifest = json::parse(read_text(run_dir / "manifest.json"));
  Trajectory traj;
  traj.config = parse_config_text(manifest.at("config").dump());
  traj.grid = make_grid(traj.config);
  traj.cutoff = cutoff_field(traj.config.n, traj.grid, traj.config.cutoff_profile);
  traj.initial_support_radius = manifest.at("initial_support_radius").get<double>();
  traj.steps = parse_steps_csv(read_text(run_dir / manifest.at("step_log").get<std::string>()));
  for (const auto& w : manifest.at("windows")) traj.windows.push_back(window_from_json(w));
  for (const auto& s : manifest.at("states")) {
    fs::path stem = run_dir / s.at("csv").get<std::string>();
    stem.replace_extension();
    traj.states.push_back(read_state(stem, traj.grid));
  }
  return traj;
}

int cmd_run(const fs::path& config, const CommandFlags& flags, std::ostream& out,
            std::ostream& err) {
  SolverConfig cfg;
  try {
    cfg = load_config(config, flags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  const Clock clock;
  fs::path dir;
  try {
    dir = make_run_dir(cfg, flags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  if (!flags.quiet) out << "run directory " << dir.string() << '\n';

  RunWriter writer(dir, cfg.output.snapshots_every, flags.quiet, out);
  int code = 0;
  std::string error;
  std::optional<Trajectory> traj;
  std::vector<EstimateReport> reports;
  json manifest;
  try {
    traj = run(cfg, &writer);
    writer.finish();
    reports = run_check_suite(*traj);
    for (auto& f : write_reports(dir, reports)) writer.add_file(std::move(f));
    if (!flags.quiet) out << summary_table(reports);
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    error = e.what();
    err << "error: " << error << '\n';
    if (const auto* pe = dynamic_cast<const PicardError*>(&e)) manifest["picard_differences"] = pe->differences();
  }

  try {
    write_text_atomic(dir / "logs/diagnostics.csv", steps_csv(writer.steps()));
    writer.add_file("logs/diagnostics.csv");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (code == 0) code = 1;
  }

  manifest["config"] = json::parse(config_json(cfg));
  manifest["config_hash"] = config_hash(cfg);
  manifest["config_source"] = fs::absolute(config).lexically_normal().string();
  manifest["defaults_applied"] = cfg.defaults_applied;
  manifest["grid"] = grid_json(cfg);
  if (!writer.windows().empty()) manifest["params"] = params_json(writer.windows().front().params);
  json windows = json::array();
  json window_seconds = json::array();
  for (const auto& w : writer.windows()) {
    windows.push_back(window_json(w));
    window_seconds.push_back(w.wall_seconds);
  }
  manifest["windows"] = windows;
  manifest["initial_support_radius"] = traj ? traj->initial_support_radius : 0.0;
  manifest["states"] = writer.states();
  manifest["step_log"] = "logs/diagnostics.csv";
  manifest["files"] = writer.files();
  manifest["checks"] = reports_status(reports);
  manifest["status"] = status_json(code, error);
  json timing = clock.finish();
  timing["window_seconds"] = window_seconds;
  manifest["timing"] = timing;
  manifest["environment"] = environment_json();
  try {
    write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: cannot write manifest: " << e.what() << '\n';
    if (code == 0) code = 1;
  }
  return code;
}

int cmd_family(const fs::path& config, const CommandFlags& flags, std::ostream& out,
               std::ostream& err) {
  SolverConfig cfg;
  try {
    cfg = load_config(config, flags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  const Clock clock;
  fs::path dir;
  try {
    dir = make_run_dir(cfg, flags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  if (!flags.quiet) out << "family directory " << dir.string() << '\n';

  struct Collector : RunObserver {
    std::vector<StepRecord> steps;
    std::vector<WindowRecord> windows;
    void on_step(const StepRecord& s) override { steps.push_back(s); }
    void on_window(const WindowRecord& w) override { windows.push_back(w); }
  };
  std::vector<std::unique_ptr<Collector>> collectors;
  auto observer_for = [&](double n) -> RunObserver* {
    if (!flags.quiet) out << "cutoff n = " << n << '\n' << std::flush;
    collectors.push_back(std::make_unique<Collector>());
    return collectors.back().get();
  };

  int code = 0;
  std::string error;
  json family;
  std::vector<std::string> files;
  try {
    const FamilyReport rep = run_cutoff_family(cfg, flags.n_list, observer_for);
    family = {{"n_list", rep.n_list},
              {"L", rep.L},
              {"pair_differences", rep.pair_differences},
              {"initial_differences", rep.initial_differences},
              {"sup_h3", rep.sup_h3},
              {"h3_variation", rep.h3_variation},
              {"single_run", rep.single_run},
              {"strictly_decreasing", rep.strictly_decreasing}};
    write_text_atomic(dir / "reports/family.json", family.dump(2) + "\n");
    files.push_back("reports/family.json");
    if (!flags.quiet) {
      char buf[160];
      for (std::size_t k = 0; k < rep.pair_differences.size(); ++k) {
        std::snprintf(buf, sizeof buf, "n = %g vs %g: sup_t |du|_H1(r < %g) = %.6e\n",
                      rep.n_list[k], rep.n_list[k + 1], rep.L, rep.pair_differences[k]);
        out << buf;
      }
      for (std::size_t k = 0; k < rep.sup_h3.size(); ++k) {
        std::snprintf(buf, sizeof buf, "n = %g: sup_t |u|_H3 = %.6e\n", rep.n_list[k], rep.sup_h3[k]);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "strictly decreasing: %s, H3 variation %.4f\n",
                    rep.strictly_decreasing ? "yes" : "no", rep.h3_variation);
      out << buf;
    }
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    error = e.what();
    err << "error: " << error << '\n';
  }

  json runs = json::array();
  for (std::size_t k = 0; k < collectors.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "logs/n_%g.csv", flags.n_list[k]);
    try {
      write_text_atomic(dir / name, steps_csv(collectors[k]->steps));
      files.push_back(name);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      if (code == 0) code = 1;
    }
    json windows = json::array();
    for (const auto& w : collectors[k]->windows) windows.push_back(window_json(w));
    runs.push_back({{"n", flags.n_list[k]}, {"step_log", name}, {"windows", windows}});
  }

  json manifest;
  manifest["config"] = json::parse(config_json(cfg));
  manifest["config_hash"] = config_hash(cfg);
  manifest["defaults_applied"] = cfg.defaults_applied;
  manifest["grid"] = grid_json(cfg);
  manifest["runs"] = runs;
  if (!family.is_null()) manifest["family"] = family;
  manifest["files"] = files;
  manifest["status"] = status_json(code, error);
  manifest["timing"] = clock.finish();
  manifest["environment"] = environment_json();
  try {
    write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: cannot write manifest: " << e.what() << '\n';
    if (code == 0) code = 1;
  }
  return code;
}

int cmd_checks(const fs::path& run_dir, const CommandFlags& flags, std::ostream& out,
               std::ostream& err) {
  try {
    Trajectory traj = load_trajectory(run_dir);
    if (flags.seed) traj.config.seed = *flags.seed;
    const auto reports = run_check_suite(traj);
    write_reports(run_dir, reports);
    if (!flags.quiet) out << summary_table(reports);
    for (const auto& r : reports)
      if (!r.passed) return static_cast<int>(ExitCode::validation);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

int cmd_validate(const fs::path& config, const CommandFlags& flags, std::ostream& out,
                 std::ostream& err) {
  SolverConfig cfg;
  try {
    cfg = load_config(config, flags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  const Clock clock;
  fs::path dir;
  try {
    dir = make_run_dir(cfg, flags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  int code = 0;
  std::string error;
  std::vector<std::string> files;
  try {
    const ValidationReport rep = run_validation(cfg.grid.n_r, cfg.grid.n_theta);
    write_text_atomic(dir / "reports/validation.json", validation_json(rep) + "\n");
    files.push_back("reports/validation.json");
    if (!flags.quiet) out << validation_table(rep);
    if (!rep.passed) code = static_cast<int>(ExitCode::validation);
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    error = e.what();
    err << "error: " << error << '\n';
  }
  json manifest;
  manifest["config"] = json::parse(config_json(cfg));
  manifest["config_hash"] = config_hash(cfg);
  manifest["defaults_applied"] = cfg.defaults_applied;
  manifest["grid"] = grid_json(cfg);
  manifest["files"] = files;
  manifest["status"] = status_json(code, error);
  manifest["timing"] = clock.finish();
  manifest["environment"] = environment_json();
  try {
    write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: cannot write manifest: " << e.what() << '\n';
    if (code == 0) code = 1;
  }
  return code;
}

}  // namespace sgflow
