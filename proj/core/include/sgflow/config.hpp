#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgflow/cutoff.hpp"

namespace sgflow {

enum class JoinMode { resync, transport };

JoinMode parse_join_mode(std::string_view name);
std::string_view to_string(JoinMode m);

struct GridConfig {
  int n_r = 128;
  int n_theta = 128;
  double r_max = 20.0;
  double stretch = 20.0;
};

struct Tolerances {
  double picard_tol = 1e-10;  // relative to sup over slices of ||u||_H1
  int picard_max_iters = 10;
  double elliptic_tol = 1e-8;
  double support_threshold = 1e-10;  // relative to max |q|
};

struct InitialDataConfig {
  double amplitude = 1.0;
  double inner_radius = 1.0;
  double outer_radius = 3.0;
  int angular_mode = 1;
  double swirl = 0.0;  // weight of an added axisymmetric profile
  // When set, the amplitude is rescaled so that ||u0||_H3 equals this value.
  std::optional<double> h3_norm;
};

struct OutputConfig {
  double snapshot_interval = 0.05;
  int snapshots_every = 1;
};

struct SolverConfig {
  double nu = 0.0;
  double T = 0.0;
  double n = 8.0;
  double eps = 0.0;  // 0 selects three wall cells
  double dt = 1e-3;
  int s = 3;
  double C_T = 1.0;
  double default_window = 0.01;
  int integrator_order = 2;
  JoinMode join_mode = JoinMode::resync;
  CutoffProfile cutoff_profile = CutoffProfile::quintic;
  bool oracle_mode = false;  // permits nu = 0
  std::uint64_t seed = 0;
  GridConfig grid;
  Tolerances tol;
  InitialDataConfig initial;
  OutputConfig output;

  // Keys that were not present in the parsed file.
  std::vector<std::string> defaults_applied;
};

// Throws ConfigError naming the violated invariant and the offending value.
void validate(const SolverConfig& cfg);

SolverConfig parse_config(const std::filesystem::path& path);
SolverConfig parse_config_text(std::string_view yaml);

// Canonical JSON of every effective setting (excluding defaults_applied).
std::string config_json(const SolverConfig& cfg);
// Short stable hex digest of config_json.
std::string config_hash(const SolverConfig& cfg);

}  // namespace sgflow
