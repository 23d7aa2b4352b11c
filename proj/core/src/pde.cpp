#include "psindy/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "psindy/errors.hpp"

namespace psindy {

void validate(const Field2D& f) {
  if (f.nx < 3 || f.ny < 3) throw InvalidArgument("field: grid must be at least 3x3");
  if (!(f.lx > 0.0) || !(f.ly > 0.0)) throw InvalidArgument("field: half-widths must be positive");
  const double hx = 2.0 * f.lx / static_cast<double>(f.nx);
  const double hy = 2.0 * f.ly / static_cast<double>(f.ny);
  if (std::abs(hx - hy) > 1e-12 * hx) throw InvalidArgument("field: unequal grid spacing");
  if (f.u.size() != f.points() || f.v.size() != f.points()) {
    throw InvalidArgument("field: array length differs from nx*ny");
  }
}

Field2D uniform_field(std::size_t nx, std::size_t ny, double lx, double ly, double u0, double v0) {
  Field2D f{nx, ny, lx, ly, std::vector<double>(nx * ny, u0), std::vector<double>(nx * ny, v0)};
  validate(f);
  return f;
}

Field2D spiral_seed(std::size_t nx, std::size_t ny, double lx, double ly) {
  Field2D f = uniform_field(nx, ny, lx, ly, 0.0, 0.0);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = f.x(i);
      const double y = f.y(j);
      const double r = std::hypot(x, y);
      const double theta = std::atan2(y, x);
      f.u[j * nx + i] = std::tanh(r) * std::cos(theta - r);
      f.v[j * nx + i] = std::tanh(r) * std::sin(theta - r);
    }
  }
  return f;
}

void laplacian(const std::vector<double>& f, std::size_t nx, std::size_t ny, double h,
               std::vector<double>& out) {
  out.resize(nx * ny);
  const double inv_h2 = 1.0 / (h * h);
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t jm = (j + ny - 1) % ny;
    const std::size_t jp = (j + 1) % ny;
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t im = (i + nx - 1) % nx;
      const std::size_t ip = (i + 1) % nx;
      out[j * nx + i] = (f[j * nx + im] + f[j * nx + ip] + f[jm * nx + i] + f[jp * nx + i] -
                         4.0 * f[j * nx + i]) * inv_h2;
    }
  }
}

namespace {

struct Rhs {
  const LambdaOmegaParams& params;
  std::size_t nx, ny;
  double h;
  std::vector<double> lap_u, lap_v;

  void operator()(const std::vector<double>& u, const std::vector<double>& v,
                  std::vector<double>& du, std::vector<double>& dv) {
    laplacian(u, nx, ny, h, lap_u);
    if (!params.literal_form) laplacian(v, nx, ny, h, lap_v);
    const std::vector<double>& lap_for_v = params.literal_form ? lap_u : lap_v;
    const double lam_sign = params.literal_form ? -1.0 : 1.0;
    du.resize(u.size());
    dv.resize(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double a = u[k] * u[k] + v[k] * v[k];
      const double a2 = a * a;
      const double lam = 1.0 - a2;
      const double om = -params.beta * a2;
      du[k] = params.diffusion * lap_u[k] + lam * u[k] - om * v[k];
      dv[k] = params.diffusion * lap_for_v[k] + om * u[k] + lam_sign * lam * v[k];
    }
  }
};

void store_snapshot(SnapshotMatrix& s, Eigen::Index col, const std::vector<double>& f, double t) {
  s.columns.col(col) = Eigen::Map<const Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
  s.times.push_back(t);
}

}  // namespace

LambdaOmegaRun lambda_omega_simulate(const LambdaOmegaParams& params, const Field2D& init,
                                     double t_end, double dt, std::size_t snap_stride) {
  validate(init);
  if (!(dt > 0.0)) throw InvalidArgument("lambda_omega: dt must be positive");
  if (!(t_end > 0.0)) throw InvalidArgument("lambda_omega: t_end must be positive");
  if (snap_stride < 1) throw InvalidArgument("lambda_omega: snap_stride must be >= 1");
  const double h = init.spacing();
  if (params.diffusion > 0.0 && !(dt < h * h / (4.0 * params.diffusion))) {
    throw InvalidArgument(fmt::format("lambda_omega: dt = {} violates dt < h^2/(4D) = {}", dt,
                                      h * h / (4.0 * params.diffusion)));
  }
  const auto all_finite = [](const std::vector<double>& f) {
    return std::all_of(f.begin(), f.end(), [](double x) { return std::isfinite(x); });
  };
  if (!all_finite(init.u) || !all_finite(init.v)) throw InvalidArgument("lambda_omega: non-finite initial field");

  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t n_snap = steps / snap_stride + 1;
  const std::size_t n = init.points();

  LambdaOmegaRun run;
  run.u.columns.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_snap));
  run.v.columns.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_snap));

  Rhs rhs{params, init.nx, init.ny, h, {}, {}};
  std::vector<double> u = init.u, v = init.v;
  std::vector<double> k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
  std::vector<double> tu(n), tv(n);

  Eigen::Index snap = 0;
  store_snapshot(run.u, snap, u, 0.0);
  store_snapshot(run.v, snap, v, 0.0);
  ++snap;

  for (std::size_t s = 0; s < steps; ++s) {
    rhs(u, v, k1u, k1v);
    for (std::size_t k = 0; k < n; ++k) {
      tu[k] = u[k] + 0.5 * dt * k1u[k];
      tv[k] = v[k] + 0.5 * dt * k1v[k];
    }
    rhs(tu, tv, k2u, k2v);
    for (std::size_t k = 0; k < n; ++k) {
      tu[k] = u[k] + 0.5 * dt * k2u[k];
      tv[k] = v[k] + 0.5 * dt * k2v[k];
    }
    rhs(tu, tv, k3u, k3v);
    for (std::size_t k = 0; k < n; ++k) {
      tu[k] = u[k] + dt * k3u[k];
      tv[k] = v[k] + dt * k3v[k];
    }
    rhs(tu, tv, k4u, k4v);
    for (std::size_t k = 0; k < n; ++k) {
      u[k] += dt / 6.0 * (k1u[k] + 2.0 * k2u[k] + 2.0 * k3u[k] + k4u[k]);
      v[k] += dt / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
    }
    const double t = static_cast<double>(s + 1) * dt;
    if (!all_finite(u) || !all_finite(v)) {
      throw DivergenceError(fmt::format("lambda_omega: field became non-finite at t = {}", t),
                            static_cast<double>(s) * dt);
    }
    if ((s + 1) % snap_stride == 0) {
      store_snapshot(run.u, snap, u, t);
      store_snapshot(run.v, snap, v, t);
      ++snap;
    }
  }
  run.final_state = init;
  run.final_state.u = std::move(u);
  run.final_state.v = std::move(v);
  return run;
}

double SvdResult::energy_fraction(std::size_t k) const {
  const double total = singular_values.squaredNorm();
  if (total == 0.0) return 0.0;
  k = std::min<std::size_t>(k, static_cast<std::size_t>(singular_values.size()));
  return singular_values.head(static_cast<Eigen::Index>(k)).squaredNorm() / total;
}

SvdResult snapshot_svd(const SnapshotMatrix& m, std::size_t rank) {
  const Eigen::Index n = m.columns.cols();
  if (rank > static_cast<std::size_t>(n)) {
    throw InvalidArgument(fmt::format("snapshot_svd: rank {} exceeds {} snapshots", rank, n));
  }
  const Matrix gram = m.columns.transpose() * m.columns;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success) throw Error("snapshot_svd: eigendecomposition failed");

  // Eigen returns ascending eigenvalues; reverse to descending.
  SvdResult out;
  out.times = m.times;
  out.singular_values.resize(n);
  Matrix vecs(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;
    out.singular_values[k] = std::sqrt(std::max(es.eigenvalues()[src], 0.0));
    vecs.col(k) = es.eigenvectors().col(src);
  }

  const double sigma1 = n > 0 ? out.singular_values[0] : 0.0;
  const double cutoff = std::max(1e-14, 1e-7 * sigma1);
  std::size_t r = 0;
  while (r < rank && out.singular_values[static_cast<Eigen::Index>(r)] > cutoff) ++r;
  out.rank = r;

  const Eigen::Index N = m.columns.rows();
  out.spatial_modes.resize(N, static_cast<Eigen::Index>(r));
  out.temporal_modes.resize(static_cast<Eigen::Index>(r), n);
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(r); ++k) {
    Vector e = vecs.col(k);
    // Sign convention: largest-magnitude temporal entry is positive.
    Eigen::Index imax = 0;
    e.cwiseAbs().maxCoeff(&imax);
    if (e[imax] < 0.0) e = -e;
    const double s = out.singular_values[k];
    out.spatial_modes.col(k) = m.columns * e / s;
    out.temporal_modes.row(k) = s * e.transpose();
  }
  return out;
}

SampleSequence mode_timeseries(const SvdResult& svd, std::array<std::size_t, 2> modes,
                               std::size_t stride) {
  for (std::size_t k : modes) {
    if (k >= svd.rank) {
      throw InvalidArgument(fmt::format("mode_timeseries: mode {} not below rank {}", k, svd.rank));
    }
  }
  const auto n = static_cast<std::size_t>(svd.temporal_modes.cols());
  if (stride < 1 || stride > n) {
    throw InvalidArgument(fmt::format("mode_timeseries: stride {} invalid for {} snapshots", stride, n));
  }
  SampleSequence seq;
  const std::size_t count = (n - 1) / stride + 1;
  seq.samples.resize(static_cast<Eigen::Index>(count), 2);
  for (std::size_t i = 0; i < count; ++i) {
    const auto col = static_cast<Eigen::Index>(i * stride);
    seq.samples(static_cast<Eigen::Index>(i), 0) = svd.temporal_modes(static_cast<Eigen::Index>(modes[0]), col);
    seq.samples(static_cast<Eigen::Index>(i), 1) = svd.temporal_modes(static_cast<Eigen::Index>(modes[1]), col);
    seq.times.push_back(svd.times.empty() ? static_cast<double>(i * stride) : svd.times[i * stride]);
  }
  seq.source_id = "modes";
  return seq;
}

Vector reconstruct_field(const SvdResult& svd, const Vector& mode_values,
                         std::array<std::size_t, 2> modes) {
  if (mode_values.size() != 2) throw InvalidArgument("reconstruct_field: expected two mode values");
  if (!mode_values.allFinite()) throw InvalidArgument("reconstruct_field: non-finite mode values");
  Vector field = Vector::Zero(svd.spatial_modes.rows());
  for (std::size_t k = 0; k < 2; ++k) {
    if (modes[k] >= svd.rank) throw InvalidArgument("reconstruct_field: mode index out of range");
    field += mode_values[static_cast<Eigen::Index>(k)] *
             svd.spatial_modes.col(static_cast<Eigen::Index>(modes[k]));
  }
  return field;
}

double field_correlation(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() == 0) throw InvalidArgument("field_correlation: size mismatch");
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double denom = da.norm() * db.norm();
  return denom == 0.0 ? 0.0 : da.dot(db) / denom;
}

}  // namespace psindy
