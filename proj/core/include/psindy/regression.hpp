#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "psindy/dynamics.hpp"

namespace psindy {

class FeatureLibrary;

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct StlsqConfig {
  double lambda = 0.05;
  int max_iterations = 25;
  /// Tikhonov weight; 0 disables the augmented solve.
  double ridge = 0.0;
};

void validate(const StlsqConfig& config);

/// Sparse coefficient matrix Xi (p x d) produced by stlsq.
struct CoefficientMatrix {
  Matrix values;
  BoolMatrix support;
  std::uint64_t library_fingerprint = 0;
  double lambda = 0.0;

  // Diagnostics, one entry per output coordinate.
  std::vector<bool> empty_columns;
  std::vector<int> iterations;
  /// Active-set size after the initial solve and after every thresholding pass.
  std::vector<std::vector<std::size_t>> support_history;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
  std::size_t active_terms() const { return static_cast<std::size_t>(support.count()); }
};

/// Minimum-residual solution of A X = B by column-pivoted Householder QR.
/// Rank-deficient trailing pivoted coordinates are set to zero. With ridge > 0
/// the augmented system [A; sqrt(ridge) I] X = [B; 0] is solved instead.
Matrix least_squares(const Matrix& a, const Matrix& b, double ridge = 0.0);

/// Sequentially thresholded least squares, independently per column of x2:
/// solve, zero every |xi| <= lambda, re-solve on the survivors, repeat until
/// the support stops changing or max_iterations re-solves have run.
CoefficientMatrix stlsq(const Matrix& theta, const Matrix& x2, const StlsqConfig& config,
                        std::uint64_t library_fingerprint = 0);

/// Convenience: evaluates the library on x1 and binds the fingerprint.
CoefficientMatrix stlsq(const FeatureLibrary& library, const Matrix& x1, const Matrix& x2,
                        const StlsqConfig& config);

/// Per-column RMS of x2 - theta * xi.
Vector residual_rms(const Matrix& theta, const CoefficientMatrix& xi, const Matrix& x2);

}  // namespace psindy
