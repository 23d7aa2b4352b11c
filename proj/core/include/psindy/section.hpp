#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "psindy/dynamics.hpp"

namespace psindy {

/// Sample the full state at t = phase + k * period.
struct StrobeSection {
  double period = 1.0;
  double phase = 0.0;
};

enum class CrossingDirection { kBoth = 0, kIncreasing = 1, kDecreasing = -1 };

/// Sample where g(x) = normal . x - offset changes sign.
struct HyperplaneSection {
  Vector normal;
  double offset = 0.0;
  CrossingDirection direction = CrossingDirection::kIncreasing;
  /// State indices kept in each sample; nonempty and strictly increasing.
  std::vector<std::size_t> record_indices;
  /// Optional half-space guard: only accept crossings where x[guard_index] > 0.
  std::optional<std::size_t> guard_index;
};

using SectionSpec = std::variant<StrobeSection, HyperplaneSection>;

/// Throws InvalidArgument if the spec is malformed for a d-dimensional state.
void validate_section(const SectionSpec& spec, std::size_t state_dimension);

/// Ordered section samples x_0, x_1, ... from one trajectory.
struct SampleSequence {
  RowMatrix samples;  // one row per sample
  std::vector<double> times;
  std::string source_id;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(samples.cols()); }
  Vector sample(std::size_t n) const {
    return samples.row(static_cast<Eigen::Index>(n)).transpose();
  }
};

/// Refinement stops once |g| falls below this or after kMaxBisections halvings.
inline constexpr double kCrossingTolerance = 1e-10;
inline constexpr int kMaxBisections = 80;
/// Crossings with |dg/dt| below this at the refined point are grazing and dropped.
inline constexpr double kGrazingTolerance = 1e-8;

SampleSequence strobe_sample(const Trajectory& traj, const OdeSystem& system,
                             const StrobeSection& spec, std::string source_id = {});

SampleSequence crossing_sample(const OdeSystem& system, const Trajectory& traj,
                               const HyperplaneSection& spec, std::string source_id = {});

/// Dispatches on the section kind.
SampleSequence sample_section(const OdeSystem& system, const Trajectory& traj,
                              const SectionSpec& spec, std::string source_id = {});

/// Regression data X1 = [x_skip .. x_{m-1}], X2 = [x_{skip+1} .. x_m] stacked per
/// sequence. Pairs never straddle two sequences.
struct PairData {
  Matrix x1;
  Matrix x2;
};

PairData build_pairs(const std::vector<SampleSequence>& seqs, std::size_t skip = 0);

}  // namespace psindy
