#include "psindy/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "psindy/errors.hpp"

namespace psindy {

Vector OdeSystem::eval(double t, const Vector& x) const {
  Vector dx(static_cast<Eigen::Index>(dimension));
  field(t, x, dx);
  return dx;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ParameterMap apply_overrides(std::string_view system, ParameterMap defaults,
                             const ParameterMap& overrides) {
  for (const auto& [key, value] : overrides) {
    auto it = defaults.find(key);
    if (it == defaults.end()) {
      throw InvalidArgument(fmt::format("system '{}' has no parameter '{}'", system, key));
    }
    it->second = value;
  }
  return defaults;
}

}  // namespace

std::vector<std::string> builtin_system_names() {
  return {"rc", "hopf", "logistic", "brusselator", "rossler"};
}

OdeSystem builtin_system(std::string_view name, const ParameterMap& overrides) {
  OdeSystem sys;
  sys.name = std::string(name);

  if (name == "rc") {
    // x' = sin(2 pi t) - x
    sys.dimension = 1;
    sys.parameters = apply_overrides(name, {}, overrides);
    sys.forcing_period = 1.0;
    sys.field = [](double t, const Vector& x, Vector& dx) {
      dx[0] = std::sin(kTwoPi * t) - x[0];
    };
  } else if (name == "hopf") {
    sys.dimension = 2;
    sys.parameters = apply_overrides(name, {{"omega", kTwoPi}}, overrides);
    const double omega = sys.parameters.at("omega");
    sys.field = [omega](double, const Vector& x, Vector& dx) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      dx[0] = x[0] - omega * x[1] - x[0] * r2;
      dx[1] = omega * x[0] + x[1] - x[1] * r2;
    };
  } else if (name == "logistic") {
    sys.dimension = 1;
    sys.parameters = apply_overrides(name, {{"eps", 0.1}}, overrides);
    sys.forcing_period = 1.0;
    const double eps = sys.parameters.at("eps");
    sys.field = [eps](double t, const Vector& x, Vector& dx) {
      dx[0] = eps * x[0] * (1.0 + std::sin(kTwoPi * t) - x[0]);
    };
  } else if (name == "brusselator") {
    sys.dimension = 2;
    sys.parameters =
        apply_overrides(name, {{"a", 0.4}, {"b", 1.2}, {"alpha", 0.1}}, overrides);
    sys.forcing_period = 1.0;
    const double a = sys.parameters.at("a");
    const double b = sys.parameters.at("b");
    const double alpha = sys.parameters.at("alpha");
    sys.field = [a, b, alpha](double t, const Vector& x, Vector& dx) {
      const double x2y = x[0] * x[0] * x[1];
      dx[0] = a + alpha * std::sin(kTwoPi * t) - (b + 1.0) * x[0] + x2y;
      dx[1] = b * x[0] - x2y;
    };
  } else if (name == "rossler") {
    sys.dimension = 3;
    sys.parameters = apply_overrides(name, {{"a", 0.1}, {"b", 0.1}, {"c", 9.0}}, overrides);
    const double a = sys.parameters.at("a");
    const double b = sys.parameters.at("b");
    const double c = sys.parameters.at("c");
    sys.field = [a, b, c](double, const Vector& x, Vector& dx) {
      dx[0] = -x[1] - x[2];
      dx[1] = x[0] + a * x[1];
      dx[2] = b + x[2] * (x[0] - c);
    };
  } else {
    throw InvalidArgument(fmt::format("unknown system '{}'", name));
  }
  return sys;
}

Trajectory integrate(const OdeSystem& system, const Vector& x0, double t0, double t1,
                     double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("integrate: dt must be positive");
  if (!(t1 > t0)) throw InvalidArgument("integrate: t1 must exceed t0");
  if (static_cast<std::size_t>(x0.size()) != system.dimension) {
    throw InvalidArgument(fmt::format("integrate: x0 has length {}, system '{}' has dimension {}",
                                      x0.size(), system.name, system.dimension));
  }
  if (!x0.allFinite()) throw InvalidArgument("integrate: x0 is not finite");

  const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
  const auto d = static_cast<Eigen::Index>(system.dimension);

  Trajectory traj;
  traj.step = dt;
  traj.times.resize(steps + 1);
  traj.states.resize(static_cast<Eigen::Index>(steps + 1), d);

  Vector x = x0;
  Vector k1(d), k2(d), k3(d), k4(d), tmp(d);
  traj.times[0] = t0;
  traj.states.row(0) = x.transpose();

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    system.field(t, x, k1);
    tmp = x + 0.5 * dt * k1;
    system.field(t + 0.5 * dt, tmp, k2);
    tmp = x + 0.5 * dt * k2;
    system.field(t + 0.5 * dt, tmp, k3);
    tmp = x + dt * k3;
    system.field(t + dt, tmp, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceBound) {
      throw DivergenceError(
          fmt::format("integration of '{}' diverged after t = {}", system.name, t), t);
    }
    traj.times[k + 1] = t0 + static_cast<double>(k + 1) * dt;
    traj.states.row(static_cast<Eigen::Index>(k + 1)) = x.transpose();
  }
  return traj;
}

Vector dense_eval(const Trajectory& traj, const OdeSystem& system, double t) {
  if (traj.size() == 0) throw InvalidArgument("dense_eval: empty trajectory");
  if (!(t >= traj.start() && t <= traj.end())) {
    throw InvalidArgument(
        fmt::format("dense_eval: t = {} outside [{}, {}]", t, traj.start(), traj.end()));
  }
  // Bracketing step: times[k] <= t <= times[k + 1].
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  std::size_t k = it == traj.times.begin() ? 0 : static_cast<std::size_t>(it - traj.times.begin()) - 1;
  if (traj.times[k] == t || k + 1 >= traj.size()) return traj.state(k);

  const double ta = traj.times[k];
  const double tb = traj.times[k + 1];
  const double h = tb - ta;
  const double s = (t - ta) / h;
  const Vector xa = traj.state(k);
  const Vector xb = traj.state(k + 1);
  const Vector fa = system.eval(ta, xa);
  const Vector fb = system.eval(tb, xb);

  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * xa + (h10 * h) * fa + h01 * xb + (h11 * h) * fb;
}

}  // namespace psindy
