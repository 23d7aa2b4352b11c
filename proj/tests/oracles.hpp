#pragma once

// Independent reference computations. Nothing here calls into the library's
// numerical kernels; they share only the Eigen vector types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Strobe map of x' = sin(2 pi t) - x over one period: x -> e^{-1} x + kRcOffset.
inline const double kRcSlope = std::exp(-1.0);
inline const double kRcOffset = -2.0 * std::numbers::pi * (1.0 - std::exp(-1.0)) /
                                (1.0 + 4.0 * std::numbers::pi * std::numbers::pi);
// Frozen high-precision values of the two constants above.
inline constexpr double kRcSlopeFrozen = 0.36787944117144232;
inline constexpr double kRcOffsetFrozen = -0.098119710271732382;

// Return map of the Hopf normal form to the positive x-axis with omega = 2 pi:
// r' = r - r^3 over one unit of time.
inline double hopf_return(double r) {
  const double e = std::exp(1.0);
  return r * e / std::sqrt(1.0 + r * r * (e * e - 1.0));
}
// Frozen values of hopf_return.
inline constexpr double kHopfAt03 = 0.64979053760037171;
inline constexpr double kHopfAt05 = 0.84334725601474145;
inline constexpr double kHopfAt13 = 1.0288279466197821;
// Multiplier of the fixed point r = 1 is e^{-2}.
inline const double kHopfMultiplier = std::exp(-2.0);

// Harmonic oscillator x'' = -x from (x0, v0) at t = 0.
inline Vec oscillator(double x0, double v0, double t) {
  Vec s(2);
  s << x0 * std::cos(t) + v0 * std::sin(t), -x0 * std::sin(t) + v0 * std::cos(t);
  return s;
}

// All exponent vectors of total degree <= max_degree, by exhaustive counting,
// then sorted: ascending degree, descending exponent vector.
inline std::vector<std::vector<int>> grlex_exponents(int d, int max_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(static_cast<std::size_t>(d), 0);
  const auto total = [](const std::vector<int>& v) {
    int s = 0;
    for (int x : v) s += x;
    return s;
  };
  for (;;) {
    if (total(e) <= max_degree) out.push_back(e);
    int k = 0;
    while (k < d && ++e[static_cast<std::size_t>(k)] > max_degree) e[static_cast<std::size_t>(k++)] = 0;
    if (k == d) break;
  }
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    if (total(a) != total(b)) return total(a) < total(b);
    return a > b;
  });
  return out;
}

inline double monomial(const std::vector<int>& e, const Vec& x) {
  double v = 1.0;
  for (std::size_t k = 0; k < e.size(); ++k) v *= std::pow(x[static_cast<Eigen::Index>(k)], e[k]);
  return v;
}

// Minimum-norm least squares through the eigendecomposition of A^T A.
inline Mat pinv_solve(const Mat& a, const Mat& b, double rel_cutoff = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a.transpose() * a);
  const Vec& w = es.eigenvalues();
  const double cut = rel_cutoff * w.cwiseAbs().maxCoeff();
  Vec inv = Vec::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > cut) inv[i] = 1.0 / w[i];
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * a.transpose() * b;
}

// Central differences of f at x.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  const Vec f0 = f(x);
  Mat j(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

// Full SVD by two-sided Jacobi rotations (Eigen's JacobiSVD), thin factors.
struct Svd {
  Vec sigma;
  Mat u;
  Mat v;
};
inline Svd brute_svd(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

// Singular values as square roots of the eigenvalues of M M^T (the other Gram
// matrix), descending.
inline Vec sigma_from_outer_gram(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m * m.transpose());
  Vec w = es.eigenvalues().reverse();
  return w.head(std::min(m.rows(), m.cols())).cwiseMax(0.0).cwiseSqrt();
}

// Largest principal angle (as its sine) between two column spaces with
// orthonormal bases.
inline double subspace_distance(const Mat& a, const Mat& b) {
  const Mat p = a - b * (b.transpose() * a);
  return p.norm() / std::sqrt(static_cast<double>(a.cols()));
}

}  // namespace oracle
