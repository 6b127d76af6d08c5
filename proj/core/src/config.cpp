#include "sgflow/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sgflow/errors.hpp"
#include "sgflow/grid.hpp"

namespace sgflow {

JoinMode parse_join_mode(std::string_view name) {
  if (name == "resync") return JoinMode::resync;
  if (name == "transport") return JoinMode::transport;
  throw ConfigError("unknown join_mode '" + std::string(name) + "' (expected resync or transport)");
}

std::string_view to_string(JoinMode m) {
  return m == JoinMode::resync ? "resync" : "transport";
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& invariant, const std::string& value) {
  if (!ok) throw ConfigError("invariant " + invariant + " violated (" + value + ")");
}

// Reads a section while tracking which keys were consumed and which fell back to defaults.
class Section {
 public:
  Section(YAML::Node node, std::string prefix, std::vector<std::string>& defaults)
      : node_(std::move(node)), prefix_(std::move(prefix)), defaults_(defaults) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      throw ConfigError("section '" + prefix_ + "' must be a mapping");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    const YAML::Node v = present() ? node_[key] : YAML::Node();
    if (!v || v.IsNull()) {
      defaults_.push_back(prefix_ + key);
      return;
    }
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("key '" + prefix_ + key + "' has the wrong type");
    }
  }

  template <class T>
  void get_required(const std::string& key, T& out) {
    seen_.insert(key);
    if (!present() || !node_[key] || node_[key].IsNull())
      throw ConfigError("missing required key '" + prefix_ + key + "'");
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("key '" + prefix_ + key + "' has the wrong type");
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(present() ? node_[key] : YAML::Node(), prefix_ + key + ".", defaults_);
  }

  void reject_unknown() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const auto k = kv.first.as<std::string>();
      if (!seen_.count(k)) throw ConfigError("unknown key '" + prefix_ + k + "'");
    }
  }

 private:
  bool present() const { return node_ && node_.IsMap(); }

  YAML::Node node_;
  std::string prefix_;
  std::vector<std::string>& defaults_;
  std::set<std::string> seen_;
};

SolverConfig from_yaml(const YAML::Node& root) {
  if (!root || !root.IsMap()) throw ConfigError("config root must be a mapping");
  SolverConfig c;
  std::vector<std::string> defaults;
  Section top(root, "", defaults);
  top.get_required("nu", c.nu);
  top.get_required("T", c.T);
  top.get("n", c.n);
  top.get("eps", c.eps);
  top.get("dt", c.dt);
  top.get("s", c.s);
  top.get("C_T", c.C_T);
  top.get("default_window", c.default_window);
  top.get("integrator_order", c.integrator_order);
  std::string join(to_string(c.join_mode));
  top.get("join_mode", join);
  c.join_mode = parse_join_mode(join);
  std::string profile(to_string(c.cutoff_profile));
  top.get("cutoff_profile", profile);
  try {
    c.cutoff_profile = parse_cutoff_profile(profile);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  top.get("oracle_mode", c.oracle_mode);
  top.get("seed", c.seed);

  Section grid = top.child("grid");
  grid.get("n_r", c.grid.n_r);
  grid.get("n_theta", c.grid.n_theta);
  grid.get("r_max", c.grid.r_max);
  grid.get("stretch", c.grid.stretch);
  grid.reject_unknown();

  Section tol = top.child("tolerances");
  tol.get("picard_tol", c.tol.picard_tol);
  tol.get("picard_max_iters", c.tol.picard_max_iters);
  tol.get("elliptic_tol", c.tol.elliptic_tol);
  tol.get("support_threshold", c.tol.support_threshold);
  tol.reject_unknown();

  Section init = top.child("initial");
  init.get("amplitude", c.initial.amplitude);
  init.get("inner_radius", c.initial.inner_radius);
  init.get("outer_radius", c.initial.outer_radius);
  init.get("angular_mode", c.initial.angular_mode);
  init.get("swirl", c.initial.swirl);
  double h3 = -1.0;
  init.get("h3_norm", h3);
  if (h3 >= 0.0) c.initial.h3_norm = h3;
  else defaults.erase(std::remove(defaults.begin(), defaults.end(), "initial.h3_norm"), defaults.end());
  init.reject_unknown();

  Section out = top.child("output");
  out.get("snapshot_interval", c.output.snapshot_interval);
  out.get("snapshots_every", c.output.snapshots_every);
  out.reject_unknown();

  top.reject_unknown();
  c.defaults_applied = std::move(defaults);
  validate(c);
  return c;
}

}  // namespace

void validate(const SolverConfig& c) {
  if (c.oracle_mode)
    require(std::isfinite(c.nu) && c.nu >= 0.0, "nu >= 0 (oracle mode)", "nu = " + num(c.nu));
  else
    require(std::isfinite(c.nu) && c.nu > 0.0, "nu > 0", "nu = " + num(c.nu));
  require(std::isfinite(c.T) && c.T >= 0.0, "T >= 0", "T = " + num(c.T));
  require(std::isfinite(c.dt) && c.dt > 0.0, "dt > 0", "dt = " + num(c.dt));
  require(c.n > 0.0, "n > 0", "n = " + num(c.n));
  require(c.n < 0.5 * c.grid.r_max, "n < r_max/2",
          "n = " + num(c.n) + ", r_max = " + num(c.grid.r_max));
  require(c.eps >= 0.0, "eps >= 0", "eps = " + num(c.eps));
  require(c.s >= 3 && c.s <= PolarGrid::kMaxSobolevOrder, "3 <= s <= 5", "s = " + std::to_string(c.s));
  require(c.C_T > 0.0, "C_T > 0", "C_T = " + num(c.C_T));
  require(c.default_window > 0.0, "default_window > 0", "default_window = " + num(c.default_window));
  require(c.integrator_order == 2 || c.integrator_order == 4, "integrator_order in {2, 4}",
          "integrator_order = " + std::to_string(c.integrator_order));

  require(c.grid.n_r >= 16, "grid.n_r >= 16", "n_r = " + std::to_string(c.grid.n_r));
  require(c.grid.n_theta >= 16 && c.grid.n_theta % 2 == 0, "grid.n_theta even and >= 16",
          "n_theta = " + std::to_string(c.grid.n_theta));
  require(c.grid.r_max >= 8.0, "grid.r_max >= 8", "r_max = " + num(c.grid.r_max));
  require(c.grid.stretch > 0.0, "grid.stretch > 0", "stretch = " + num(c.grid.stretch));

  require(c.tol.picard_tol > 0.0, "tolerances.picard_tol > 0", num(c.tol.picard_tol));
  require(c.tol.picard_max_iters >= 1, "tolerances.picard_max_iters >= 1",
          std::to_string(c.tol.picard_max_iters));
  require(c.tol.elliptic_tol > 0.0, "tolerances.elliptic_tol > 0", num(c.tol.elliptic_tol));
  require(c.tol.support_threshold > 0.0 && c.tol.support_threshold < 1.0,
          "0 < tolerances.support_threshold < 1", num(c.tol.support_threshold));

  const auto& in = c.initial;
  require(std::isfinite(in.amplitude), "initial.amplitude finite", num(in.amplitude));
  require(std::isfinite(in.swirl), "initial.swirl finite", num(in.swirl));
  require(in.inner_radius >= 1.0 && in.inner_radius < in.outer_radius,
          "1 <= initial.inner_radius < initial.outer_radius",
          num(in.inner_radius) + ", " + num(in.outer_radius));
  require(in.outer_radius < 0.5 * c.grid.r_max, "initial.outer_radius < r_max/2",
          num(in.outer_radius));
  require(in.angular_mode >= 0 && in.angular_mode < c.grid.n_theta / 2,
          "0 <= initial.angular_mode < n_theta/2", std::to_string(in.angular_mode));
  if (in.h3_norm) require(*in.h3_norm >= 0.0, "initial.h3_norm >= 0", num(*in.h3_norm));

  require(c.output.snapshot_interval >= 0.0, "output.snapshot_interval >= 0",
          num(c.output.snapshot_interval));
  require(c.output.snapshots_every >= 1, "output.snapshots_every >= 1",
          std::to_string(c.output.snapshots_every));
}

SolverConfig parse_config_text(std::string_view yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return from_yaml(root);
}

SolverConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_json(const SolverConfig& c) {
  nlohmann::json j;
  j["nu"] = c.nu;
  j["T"] = c.T;
  j["n"] = c.n;
  j["eps"] = c.eps;
  j["dt"] = c.dt;
  j["s"] = c.s;
  j["C_T"] = c.C_T;
  j["default_window"] = c.default_window;
  j["integrator_order"] = c.integrator_order;
  j["join_mode"] = std::string(to_string(c.join_mode));
  j["cutoff_profile"] = std::string(to_string(c.cutoff_profile));
  j["oracle_mode"] = c.oracle_mode;
  j["seed"] = c.seed;
  j["grid"] = {{"n_r", c.grid.n_r},
               {"n_theta", c.grid.n_theta},
               {"r_max", c.grid.r_max},
               {"stretch", c.grid.stretch}};
  j["tolerances"] = {{"picard_tol", c.tol.picard_tol},
                     {"picard_max_iters", c.tol.picard_max_iters},
                     {"elliptic_tol", c.tol.elliptic_tol},
                     {"support_threshold", c.tol.support_threshold}};
  j["initial"] = {{"amplitude", c.initial.amplitude},
                  {"inner_radius", c.initial.inner_radius},
                  {"outer_radius", c.initial.outer_radius},
                  {"angular_mode", c.initial.angular_mode},
                  {"swirl", c.initial.swirl}};
  if (c.initial.h3_norm) j["initial"]["h3_norm"] = *c.initial.h3_norm;
  j["output"] = {{"snapshot_interval", c.output.snapshot_interval},
                 {"snapshots_every", c.output.snapshots_every}};
  return j.dump();
}

std::string config_hash(const SolverConfig& c) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config_json(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sgflow
