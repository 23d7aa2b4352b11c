#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psindy/features.hpp"
#include "psindy/regression.hpp"
#include "psindy/section.hpp"

namespace psindy {

/// Discovered map x_{n+1} = Theta(x_n) * Xi. Immutable after construction.
class MapModel {
 public:
  /// Throws InvalidArgument when the coefficient shape or fingerprint does not
  /// match the library.
  MapModel(FeatureLibrary library, CoefficientMatrix coefficients,
           std::vector<std::string> var_names = {});

  const FeatureLibrary& library() const noexcept { return library_; }
  const CoefficientMatrix& coefficients() const noexcept { return coefficients_; }
  const Matrix& xi() const noexcept { return coefficients_.values; }
  const std::vector<std::string>& var_names() const noexcept { return var_names_; }
  std::size_t dimension() const noexcept { return library_.dimension(); }

  /// One application of the map. Throws DivergenceError on a non-finite result.
  Vector apply(const Vector& x) const;

  /// d x d matrix of partials d(out_i)/d(x_k), from exponent rules.
  Matrix jacobian(const Vector& x) const;

  /// Active terms of output coordinate i as "c*term" strings, e.g. "0.36788*x".
  std::string describe(std::size_t coordinate, int precision = 5) const;

 private:
  FeatureLibrary library_;
  CoefficientMatrix coefficients_;
  std::vector<std::string> var_names_;
};

inline constexpr double kMapDivergenceBound = 1e6;

/// x0 followed by successive iterates. Iteration stops before the first state
/// with a non-finite component or one exceeding the bound.
struct Orbit {
  RowMatrix points;
  bool diverged = false;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
  Vector point(std::size_t n) const { return points.row(static_cast<Eigen::Index>(n)).transpose(); }
};

Orbit iterate(const MapModel& model, const Vector& x0, std::size_t n,
              double bound = kMapDivergenceBound);

/// Eigenvalues of a square matrix: closed form for d <= 2, general
/// eigensolver for d = 3. Throws InvalidArgument for d > 3.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

enum class Stability { kStable, kUnstable, kIndeterminate };
std::string to_string(Stability s);

struct FixedPointReport {
  Vector location;
  std::vector<std::complex<double>> multipliers;
  Stability stability = Stability::kIndeterminate;
  double residual = 0.0;

  bool stable() const noexcept { return stability == Stability::kStable; }
};

struct FixedPointSearch {
  std::vector<FixedPointReport> points;
  /// The map is (numerically) the identity on the search region; no points listed.
  bool identity_like = false;
};

/// Box-constrained fixed-point search.
///   d = 1: sign scan of model(x) - x on a 10^4-point grid, bisection per
///          bracket, Newton polish.
///   d >= 2: damped Newton from seeds_per_axis^d grid seeds, dedup at 1e-6.
/// Reported points satisfy |model(x*) - x*| < 1e-9.
FixedPointSearch find_fixed_points(const MapModel& model, const Vector& lower, const Vector& upper,
                                   std::size_t seeds_per_axis = 8);

/// Multipliers within 1e-8 of the unit circle are reported as indeterminate.
Stability classify(const std::vector<std::complex<double>>& multipliers);

struct Cycle {
  std::size_t period = 0;
  RowMatrix points;  // one representative orbit, period rows
};

/// Least k <= max_period with |x_{n+k} - x_n|_inf < tol for 3k consecutive n,
/// after discarding `transient` iterates. Throws DivergenceError if the orbit
/// leaves the divergence bound.
std::optional<Cycle> detect_cycle(const MapModel& model, const Vector& x0, std::size_t transient,
                                  std::size_t max_period, double tol = 1e-6);

/// Number of bands in a 1-D iterate set: occupied-bin runs separated by at
/// least `min_gap` empty bins of a `bins`-bin histogram over the data range.
std::size_t band_histogram(const std::vector<double>& iterates, std::size_t bins = 100,
                           std::size_t min_gap = 2);

/// Free-running comparison of the model against a sample sequence, started
/// from the sequence's first sample.
struct TrainingError {
  RowMatrix errors;  // row n: x_n - model^n(x_0); NaN rows after divergence
  std::vector<double> cumulative_l2;  // sqrt(sum_{k<=n} |e_k|^2); inf after divergence
  bool diverged = false;

  double l2() const { return cumulative_l2.empty() ? 0.0 : cumulative_l2.back(); }
  double max_abs() const;  // over the finite rows
};

TrainingError training_error(const MapModel& model, const SampleSequence& seq);

struct SweepRow {
  double lambda = 0.0;
  std::size_t active_terms = 0;
  std::vector<std::string> terms;  // names of terms active in any coordinate
  double l2_error = 0.0;
  bool diverged = false;
};

/// Fits one model per lambda (other settings from `base`) and records its
/// sparsity and free-running training error on `seq`.
std::vector<SweepRow> sparsity_sweep(const FeatureLibrary& library, const Matrix& theta,
                                     const Matrix& x2, const std::vector<double>& lambdas,
                                     const SampleSequence& seq, const StlsqConfig& base = {},
                                     const std::vector<std::string>& var_names = {});

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Line-oriented model document; every value is a JSON literal.
std::string serialize_model(const MapModel& model);
MapModel parse_model(const std::string& text);
void save_model(const MapModel& model, const std::filesystem::path& path);
MapModel load_model(const std::filesystem::path& path);

}  // namespace psindy
