#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psindy/config.hpp"
#include "psindy/mapmodel.hpp"

namespace psindy {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitDivergence = 3, kExitIo = 4 };

/// Uniform draws from `box` with Xorshift64Star(seed), coordinate-major within
/// each point.
std::vector<Vector> initial_conditions(const std::vector<std::pair<double, double>>& box,
                                       std::size_t count, std::uint64_t seed);

std::vector<Trajectory> simulate_trajectories(const OdeSystem& system,
                                              const IntegrationConfig& integration);

/// Header `n,x1,...,xd`, one row per orbit point.
std::string orbit_csv(const Orbit& orbit);

/// Everything `analyze` computes for a model. `start` seeds the cycle and band
/// iterations (default: origin).
std::string analysis_report(const MapModel& model, const AnalysisConfig& analysis,
                            const std::optional<Vector>& start);

/// Output file name -> contents. Kept in memory so the directory is written by a
/// single writer after all computation finished.
using Artifacts = std::map<std::string, std::string>;

Artifacts run_ode_experiment(const ExperimentConfig& config);
Artifacts run_pde_experiment(const ExperimentConfig& config);
Artifacts run_experiment(const ExperimentConfig& config);

/// Creates `dir` and writes every artifact. Throws IoError.
void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts);

/// Load, run, write. Maps failures onto exit codes; a divergence still writes
/// report.txt describing it. Diagnostics go to `err`.
int run_experiment_file(const std::filesystem::path& config_path,
                        const std::filesystem::path& output_dir,
                        std::optional<std::uint64_t> seed_override, std::string& err);

}  // namespace psindy
