#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace psindy {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Named real parameters, ordered by name.
using ParameterMap = std::map<std::string, double, std::less<>>;

/// Right-hand side f(t, x) of x' = f(t, x). Writes into `dxdt` (pre-sized to d).
using VectorField = std::function<void(double t, const Vector& x, Vector& dxdt)>;

/// A continuous-time system, autonomous or T-periodically forced.
struct OdeSystem {
  std::string name;
  std::size_t dimension = 0;
  ParameterMap parameters;
  VectorField field;
  /// Present iff the system is non-autonomous with this forcing period.
  std::optional<double> forcing_period;

  Vector eval(double t, const Vector& x) const;
};

/// Components beyond this magnitude are treated as finite-time blow-up.
inline constexpr double kDivergenceBound = 1e6;

/// The five reference systems: rc, hopf, logistic, brusselator, rossler.
///
/// Parameter defaults: hopf omega = 2*pi; logistic eps = 0.1;
/// brusselator (a, b, alpha) = (0.4, 1.2, 0.1); rossler (a, b, c) = (0.1, 0.1, 9).
/// Throws InvalidArgument for an unknown name or parameter key.
OdeSystem builtin_system(std::string_view name, const ParameterMap& overrides = {});

std::vector<std::string> builtin_system_names();

/// Fixed-step solution on a uniform time grid.
struct Trajectory {
  std::vector<double> times;
  RowMatrix states;  // one row per time stamp
  double step = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(states.cols()); }
  Vector state(std::size_t k) const { return states.row(static_cast<Eigen::Index>(k)).transpose(); }
  double start() const { return times.front(); }
  double end() const { return times.back(); }
};

/// Classical RK4 from t0 until the first grid time >= t1 (grid t0 + k*dt).
/// Throws DivergenceError (carrying the last finite time) when a component
/// becomes non-finite or exceeds kDivergenceBound.
Trajectory integrate(const OdeSystem& system, const Vector& x0, double t0, double t1, double dt);

/// Cubic Hermite interpolant on the bracketing step, using the stored states
/// and the vector field at both knots. Exact at the knots.
Vector dense_eval(const Trajectory& traj, const OdeSystem& system, double t);

}  // namespace psindy
