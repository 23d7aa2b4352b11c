#pragma once

#include <cmath>
#include <numbers>

#include "psindy/dynamics.hpp"
#include "psindy/rng.hpp"

namespace testing {

// x'' = -x as a first-order system.
inline psindy::OdeSystem oscillator_system() {
  psindy::OdeSystem sys;
  sys.name = "oscillator";
  sys.dimension = 2;
  sys.field = [](double, const psindy::Vector& x, psindy::Vector& dx) {
    dx[0] = x[1];
    dx[1] = -x[0];
  };
  return sys;
}

// RC circuit made autonomous by a phase oscillator (c, s) = (cos 2pi t, sin 2pi t).
inline psindy::OdeSystem extended_rc_system() {
  psindy::OdeSystem sys;
  sys.name = "rc_extended";
  sys.dimension = 3;
  sys.field = [](double, const psindy::Vector& x, psindy::Vector& dx) {
    constexpr double w = 2.0 * std::numbers::pi;
    dx[0] = x[2] - x[0];
    dx[1] = -w * x[2];
    dx[2] = w * x[1];
  };
  return sys;
}

inline psindy::Matrix random_matrix(psindy::Xorshift64Star& rng, Eigen::Index rows, Eigen::Index cols,
                                    double lo = -1.0, double hi = 1.0) {
  psindy::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

}  // namespace testing
