#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sgflow/driver.hpp"

namespace sgflow {

// Writes through a temporary file and a rename.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

// Field snapshot as <stem>.csv (one row per node: i, j, r, theta, u1, u2, q, psi, phi) plus
// <stem>.json with the time and grid description. Values use 17 significant digits.
void write_state(const FlowState& state, const std::filesystem::path& stem);
FlowState read_state(const std::filesystem::path& stem, const GridPtr& grid);

std::string steps_csv(const std::vector<StepRecord>& steps);
std::vector<StepRecord> parse_steps_csv(std::string_view text);

}  // namespace sgflow
