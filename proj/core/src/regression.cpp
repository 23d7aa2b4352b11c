#include "psindy/regression.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <fmt/format.h>

#include "psindy/errors.hpp"
#include "psindy/features.hpp"

namespace psindy {

void validate(const StlsqConfig& config) {
  if (!(config.lambda > 0.0) || !std::isfinite(config.lambda)) {
    throw InvalidArgument("stlsq: lambda must be positive");
  }
  if (config.max_iterations < 1) throw InvalidArgument("stlsq: max_iterations must be >= 1");
  if (!(config.ridge >= 0.0) || !std::isfinite(config.ridge)) {
    throw InvalidArgument("stlsq: ridge must be nonnegative");
  }
}

Matrix least_squares(const Matrix& a, const Matrix& b, double ridge) {
  if (a.rows() != b.rows()) {
    throw InvalidArgument(
        fmt::format("least_squares: A has {} rows, B has {}", a.rows(), b.rows()));
  }
  if (!a.allFinite() || !b.allFinite()) throw InvalidArgument("least_squares: non-finite entries");
  if (a.cols() == 0) return Matrix(0, b.cols());

  if (ridge > 0.0) {
    const Eigen::Index m = a.rows();
    const Eigen::Index p = a.cols();
    Matrix aa(m + p, p);
    aa.topRows(m) = a;
    aa.bottomRows(p) = std::sqrt(ridge) * Matrix::Identity(p, p);
    Matrix bb = Matrix::Zero(m + p, b.cols());
    bb.topRows(m) = b;
    return Eigen::ColPivHouseholderQR<Matrix>(aa).solve(bb);
  }
  // solve() returns the basic solution: coordinates past the numerical rank
  // (in pivot order) are zero.
  return Eigen::ColPivHouseholderQR<Matrix>(a).solve(b);
}

namespace {

Matrix gather_columns(const Matrix& theta, const std::vector<Eigen::Index>& cols) {
  Matrix out(theta.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = theta.col(cols[i]);
  }
  return out;
}

}  // namespace

CoefficientMatrix stlsq(const Matrix& theta, const Matrix& x2, const StlsqConfig& config,
                        std::uint64_t library_fingerprint) {
  validate(config);
  if (theta.rows() != x2.rows()) {
    throw InvalidArgument(
        fmt::format("stlsq: theta has {} rows, X2 has {}", theta.rows(), x2.rows()));
  }
  const Eigen::Index p = theta.cols();
  const Eigen::Index d = x2.cols();
  const double lambda = config.lambda;

  CoefficientMatrix out;
  out.values = Matrix::Zero(p, d);
  out.support = BoolMatrix::Constant(p, d, false);
  out.library_fingerprint = library_fingerprint;
  out.lambda = lambda;
  out.empty_columns.assign(static_cast<std::size_t>(d), false);
  out.iterations.assign(static_cast<std::size_t>(d), 0);
  out.support_history.resize(static_cast<std::size_t>(d));

  const Matrix full = least_squares(theta, x2, config.ridge);

  for (Eigen::Index j = 0; j < d; ++j) {
    Vector xi = full.col(j);
    std::vector<bool> active(static_cast<std::size_t>(p), true);
    auto& history = out.support_history[static_cast<std::size_t>(j)];
    history.push_back(static_cast<std::size_t>(p));
    int iterations = 0;

    for (;;) {
      std::vector<bool> next(active.size());
      std::vector<Eigen::Index> cols;
      for (Eigen::Index i = 0; i < p; ++i) {
        next[static_cast<std::size_t>(i)] = active[static_cast<std::size_t>(i)] && std::abs(xi[i]) > lambda;
        if (next[static_cast<std::size_t>(i)]) cols.push_back(i);
      }
      if (next == active) break;

      active = std::move(next);
      history.push_back(cols.size());
      for (Eigen::Index i = 0; i < p; ++i) {
        if (!active[static_cast<std::size_t>(i)]) xi[i] = 0.0;
      }
      if (cols.empty() || iterations == config.max_iterations) break;

      const Vector restricted =
          least_squares(gather_columns(theta, cols), x2.col(j), config.ridge).col(0);
      xi.setZero();
      for (std::size_t k = 0; k < cols.size(); ++k) xi[cols[k]] = restricted[static_cast<Eigen::Index>(k)];
      ++iterations;
    }

    bool any = false;
    for (Eigen::Index i = 0; i < p; ++i) {
      const bool on = active[static_cast<std::size_t>(i)] && xi[i] != 0.0;
      out.support(i, j) = on;
      out.values(i, j) = on ? xi[i] : 0.0;
      any = any || on;
    }
    out.empty_columns[static_cast<std::size_t>(j)] = !any;
    out.iterations[static_cast<std::size_t>(j)] = iterations;
  }
  return out;
}

CoefficientMatrix stlsq(const FeatureLibrary& library, const Matrix& x1, const Matrix& x2,
                        const StlsqConfig& config) {
  return stlsq(library.evaluate(x1), x2, config, library.fingerprint());
}

Vector residual_rms(const Matrix& theta, const CoefficientMatrix& xi, const Matrix& x2) {
  if (theta.cols() != xi.values.rows() || theta.rows() != x2.rows() ||
      xi.values.cols() != x2.cols()) {
    throw InvalidArgument("residual_rms: shape mismatch");
  }
  const Matrix r = x2 - theta * xi.values;
  Vector out(r.cols());
  const double m = static_cast<double>(std::max<Eigen::Index>(r.rows(), 1));
  for (Eigen::Index j = 0; j < r.cols(); ++j) out[j] = std::sqrt(r.col(j).squaredNorm() / m);
  return out;
}

}  // namespace psindy
