#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "psindy/dynamics.hpp"
#include "psindy/section.hpp"

namespace psindy {

// Every real is rendered with 17 significant digits, so files round-trip exactly.

/// Header `t,x1,...,xd`.
std::string trajectory_csv(const Trajectory& traj);
/// Header `n,t,x1,...,xd`.
std::string samples_csv(const SampleSequence& seq);
/// Header `x1,...,xd` (or the given names); one row per matrix row.
std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header = {});

/// Parses a trajectory CSV; `step` is taken from the first time increment.
Trajectory read_trajectory_csv(const std::filesystem::path& path);
SampleSequence read_samples_csv(const std::filesystem::path& path);
/// Numeric matrix with one header row.
Matrix read_matrix_csv(const std::filesystem::path& path);
/// Column names of the header row.
std::vector<std::string> read_csv_header(const std::filesystem::path& path);

/// Writes `content` verbatim. Throws IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace psindy
