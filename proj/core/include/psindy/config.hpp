#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "psindy/dynamics.hpp"
#include "psindy/pde.hpp"
#include "psindy/regression.hpp"
#include "psindy/section.hpp"

namespace psindy {

/// Flat `dotted.key = value` document. `#` starts a comment line.
/// Lookups record which keys were consumed so leftovers can be rejected.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key) const;
  double real_or(const std::string& key, double fallback) const;
  long long integer(const std::string& key) const;
  long long integer_or(const std::string& key, long long fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key) const;
  /// "lo:hi, lo:hi, ..." pairs.
  std::vector<std::pair<double, double>> ranges(const std::string& key) const;

  /// Throws ConfigError naming the first key that was never looked up.
  void reject_unused() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

struct IntegrationConfig {
  double t0 = 0.0;
  double t1 = 100.0;
  double dt = 0.01;
  std::size_t n_trajectories = 5;
  std::uint64_t seed = 1;
  std::vector<std::pair<double, double>> init_box;
};

struct AnalysisConfig {
  bool fixed_points = false;
  std::vector<std::pair<double, double>> search_box;
  std::size_t seeds_per_axis = 8;
  bool cycle = false;
  std::size_t cycle_transient = 1000;
  std::size_t max_period = 64;
  double cycle_tol = 1e-6;
  bool bands = false;
  std::size_t band_iterates = 5000;
  std::size_t band_bins = 100;
  std::vector<double> sweep;
  std::size_t forecast = 0;
};

struct PdeConfig {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double lx = 10.0;
  double ly = 10.0;
  LambdaOmegaParams params;
  double dt = 0.05;
  double t_end = 20.0;
  /// Time the seed is evolved before the recorded window starts.
  double spinup = 0.0;
  std::size_t snap_stride = 1;
  std::size_t sample_stride = 5;
  std::size_t rank = 10;
  bool use_v = false;
  std::size_t forecast_steps = 40;
  bool verify_forecast = true;
  std::size_t batch = 1860;
  std::size_t batch_steps = 50;
  /// Batch initial conditions are drawn from the training mode box scaled by this.
  double batch_scale = 1.0;
  std::uint64_t seed = 1;
  bool export_snapshots = false;
};

struct ExperimentConfig {
  std::string name;
  // ODE experiments
  std::string system;
  ParameterMap parameters;
  IntegrationConfig integration;
  SectionSpec section = StrobeSection{};
  std::size_t skip = 0;
  bool write_trajectories = true;
  // PDE experiments
  std::optional<PdeConfig> pde;

  int degree = 5;
  StlsqConfig stlsq;
  AnalysisConfig analysis;

  bool is_pde() const noexcept { return pde.has_value(); }
};

/// Parses and validates; every failure is a ConfigError naming the field path.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace psindy
