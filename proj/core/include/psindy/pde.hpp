#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "psindy/dynamics.hpp"
#include "psindy/section.hpp"

namespace psindy {

/// Two-component field on the periodic square [-lx, lx) x [-ly, ly).
/// Point (i, j) sits at (-lx + i*h, -ly + j*h) and is stored at j*nx + i.
struct Field2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  std::vector<double> u;
  std::vector<double> v;

  double spacing() const noexcept { return 2.0 * lx / static_cast<double>(nx); }
  std::size_t points() const noexcept { return nx * ny; }
  double x(std::size_t i) const noexcept { return -lx + static_cast<double>(i) * spacing(); }
  double y(std::size_t j) const noexcept { return -ly + static_cast<double>(j) * spacing(); }
};

/// Throws InvalidArgument for inconsistent sizes or unequal axis spacing.
void validate(const Field2D& f);

/// u = tanh(r) cos(theta - r), v = tanh(r) sin(theta - r).
Field2D spiral_seed(std::size_t nx, std::size_t ny, double lx, double ly);
Field2D uniform_field(std::size_t nx, std::size_t ny, double lx, double ly, double u0, double v0);

/// Second-order five-point Laplacian with periodic wrap.
void laplacian(const std::vector<double>& f, std::size_t nx, std::size_t ny, double h,
               std::vector<double>& out);

/// u_t = D lap(u) + L(A) u - W(A) v
/// v_t = D lap(v) + W(A) u + L(A) v,   A = u^2 + v^2, L = 1 - A^2, W = -beta A^2.
/// `literal_form` switches the v-equation to D lap(u) + W(A) u - L(A) v.
struct LambdaOmegaParams {
  double diffusion = 0.1;
  double beta = 1.0;
  bool literal_form = false;
};

/// Columns are flattened fields, one per snapshot, uniformly spaced in time.
struct SnapshotMatrix {
  Matrix columns;
  std::vector<double> times;

  std::size_t count() const noexcept { return times.size(); }
};

struct LambdaOmegaRun {
  SnapshotMatrix u;
  SnapshotMatrix v;
  Field2D final_state;
};

/// RK4 in time from t = 0, snapshot every snap_stride steps (t = 0 included).
/// Requires dt < h^2 / (4 D). Throws DivergenceError when the field turns
/// non-finite.
LambdaOmegaRun lambda_omega_simulate(const LambdaOmegaParams& params, const Field2D& init,
                                     double t_end, double dt, std::size_t snap_stride = 1);

/// Truncated SVD M ~ sum_k spatial_k * temporal_k with temporal_k = sigma_k v_k^T.
struct SvdResult {
  Matrix spatial_modes;   // N x rank, orthonormal columns
  Vector singular_values; // full spectrum, nonincreasing
  Matrix temporal_modes;  // rank x snapshots
  std::size_t rank = 0;
  std::vector<double> times;

  /// Fraction of sum(sigma^2) carried by the leading k values.
  double energy_fraction(std::size_t k) const;
};

/// Method of snapshots: eigendecomposition of the snapshot Gram matrix M^T M.
/// Singular values at or below max(1e-14, 1e-7 sigma_1) are not turned into
/// modes, so `rank` may come back smaller than requested (0 for a zero matrix).
SvdResult snapshot_svd(const SnapshotMatrix& m, std::size_t rank);

/// Two-dimensional sequence (temporal_modes[modes[0]], temporal_modes[modes[1]])
/// at every stride-th snapshot.
SampleSequence mode_timeseries(const SvdResult& svd, std::array<std::size_t, 2> modes,
                               std::size_t stride);

/// sum_k mode_values[k] * spatial_modes[:, modes[k]].
Vector reconstruct_field(const SvdResult& svd, const Vector& mode_values,
                         std::array<std::size_t, 2> modes = {0, 1});

/// Pearson correlation of two equally sized fields.
double field_correlation(const Vector& a, const Vector& b);

}  // namespace psindy
