#include "psindy/mapmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include "psindy/errors.hpp"

namespace psindy {

MapModel::MapModel(FeatureLibrary library, CoefficientMatrix coefficients,
                   std::vector<std::string> var_names)
    : library_(std::move(library)),
      coefficients_(std::move(coefficients)),
      var_names_(std::move(var_names)) {
  if (coefficients_.rows() != library_.size() || coefficients_.cols() != library_.dimension()) {
    throw InvalidArgument(fmt::format(
        "map model: coefficient matrix is {}x{}, library needs {}x{}", coefficients_.rows(),
        coefficients_.cols(), library_.size(), library_.dimension()));
  }
  if (coefficients_.library_fingerprint != library_.fingerprint()) {
    throw InvalidArgument("map model: coefficient fingerprint does not match the library");
  }
  if (coefficients_.support.rows() != coefficients_.values.rows() ||
      coefficients_.support.cols() != coefficients_.values.cols()) {
    coefficients_.support = coefficients_.values.array() != 0.0;
  }
  if (var_names_.empty()) var_names_ = default_var_names(library_.dimension());
  if (var_names_.size() != library_.dimension()) {
    throw InvalidArgument("map model: var_names length differs from dimension");
  }
}

Vector MapModel::apply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw InvalidArgument("apply: state dimension mismatch");
  }
  if (!x.allFinite()) throw InvalidArgument("apply: non-finite state");
  Vector y = coefficients_.values.transpose() * library_.evaluate(x);
  if (!y.allFinite()) throw DivergenceError("apply: map produced a non-finite state", 0.0);
  return y;
}

Matrix MapModel::jacobian(const Vector& x) const {
  const auto d = static_cast<Eigen::Index>(dimension());
  const auto& terms = library_.terms();
  Matrix jac = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto row = coefficients_.values.row(static_cast<Eigen::Index>(j));
    if (row.isZero(0.0)) continue;
    for (Eigen::Index k = 0; k < d; ++k) {
      const int ek = terms[j].exponents[static_cast<std::size_t>(k)];
      if (ek == 0) continue;
      Monomial reduced = terms[j];
      reduced.exponents[static_cast<std::size_t>(k)] -= 1;
      const double partial = ek * reduced.eval(x);
      jac.col(k) += partial * row.transpose();
    }
  }
  return jac;
}

std::string MapModel::describe(std::size_t coordinate, int precision) const {
  std::string out;
  const auto& terms = library_.terms();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const double c =
        coefficients_.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(coordinate));
    if (c == 0.0) continue;
    const std::string name = term_name(terms[j], var_names_);
    std::string piece = name == "1" ? fmt::format("{:.{}g}", c, precision)
                                    : fmt::format("{:.{}g}*{}", c, precision, name);
    if (!out.empty()) out += piece.front() == '-' ? " - " + piece.substr(1) : " + " + piece;
    else out = piece;
  }
  return out.empty() ? "0" : out;
}

Orbit iterate(const MapModel& model, const Vector& x0, std::size_t n, double bound) {
  if (n < 1) throw InvalidArgument("iterate: n must be >= 1");
  Orbit orbit;
  orbit.points.resize(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(model.dimension()));
  orbit.points.row(0) = x0.transpose();
  Vector x = x0;
  std::size_t kept = 1;
  for (std::size_t k = 0; k < n; ++k) {
    Vector y = model.coefficients().values.transpose() * model.library().evaluate(x);
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > bound) {
      orbit.diverged = true;
      break;
    }
    orbit.points.row(static_cast<Eigen::Index>(kept++)) = y.transpose();
    x = std::move(y);
  }
  orbit.points.conservativeResize(static_cast<Eigen::Index>(kept), Eigen::NoChange);
  return orbit;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eigenvalues: matrix is not square");
  using C = std::complex<double>;
  switch (m.rows()) {
    case 1:
      return {C(m(0, 0), 0.0)};
    case 2: {
      // Roots of mu^2 - tr*mu + det, in the cancellation-free form.
      const double tr = m(0, 0) + m(1, 1);
      const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
      const double half = 0.5 * (m(0, 0) - m(1, 1));
      const double disc = half * half + m(0, 1) * m(1, 0);
      if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double big = 0.5 * tr + std::copysign(s, tr);
        const double small = big != 0.0 ? det / big : 0.5 * tr - std::copysign(s, tr);
        return {C(big, 0.0), C(small, 0.0)};
      }
      const double im = std::sqrt(-disc);
      return {C(0.5 * tr, im), C(0.5 * tr, -im)};
    }
    case 3: {
      Eigen::EigenSolver<Matrix> es(m, false);
      const auto ev = es.eigenvalues();
      return {ev[0], ev[1], ev[2]};
    }
    default:
      throw InvalidArgument("eigenvalues: supported for dimension <= 3 only");
  }
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::kStable:
      return "stable";
    case Stability::kUnstable:
      return "unstable";
    case Stability::kIndeterminate:
      break;
  }
  return "indeterminate";
}

Stability classify(const std::vector<std::complex<double>>& multipliers) {
  double largest = 0.0;
  for (const auto& mu : multipliers) largest = std::max(largest, std::abs(mu));
  if (largest < 1.0 - 1e-8) return Stability::kStable;
  if (largest > 1.0 + 1e-8) return Stability::kUnstable;
  return Stability::kIndeterminate;
}

namespace {

constexpr double kFixedPointResidual = 1e-9;

FixedPointReport make_report(const MapModel& model, const Vector& x) {
  FixedPointReport r;
  r.location = x;
  r.residual = (model.apply(x) - x).norm();
  r.multipliers = eigenvalues(model.jacobian(x));
  r.stability = classify(r.multipliers);
  return r;
}

// Newton on h(x) = model(x) - x with backtracking on |h|.
std::optional<Vector> newton_solve(const MapModel& model, Vector x, int max_iter = 100) {
  const auto d = x.size();
  const Matrix eye = Matrix::Identity(d, d);
  auto residual = [&](const Vector& z) -> std::optional<Vector> {
    Vector y = model.coefficients().values.transpose() * model.library().evaluate(z);
    if (!y.allFinite()) return std::nullopt;
    return Vector(y - z);
  };
  auto h = residual(x);
  if (!h) return std::nullopt;
  for (int it = 0; it < max_iter; ++it) {
    const double hn = h->norm();
    if (hn < 1e-13) return x;
    const Matrix jac = model.jacobian(x) - eye;
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) return std::nullopt;
    const Vector step = lu.solve(-*h);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      Vector trial = x + t * step;
      auto ht = residual(trial);
      if (ht && ht->norm() < hn) {
        x = std::move(trial);
        h = std::move(ht);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (h->norm() < kFixedPointResidual) return x;
  return std::nullopt;
}

FixedPointSearch fixed_points_1d(const MapModel& model, double lo, double hi) {
  constexpr std::size_t kGrid = 10000;
  FixedPointSearch out;
  auto h = [&](double x) {
    Vector v(1);
    v[0] = x;
    return (model.coefficients().values.transpose() * model.library().evaluate(v))[0] - x;
  };

  std::vector<double> grid(kGrid);
  std::vector<double> hv(kGrid);
  std::size_t near_zero = 0;
  for (std::size_t i = 0; i < kGrid; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kGrid - 1);
    hv[i] = h(grid[i]);
    if (std::abs(hv[i]) < 1e-12) ++near_zero;
  }
  if (near_zero > kGrid / 2) {
    out.identity_like = true;
    return out;
  }

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < kGrid; ++i) {
    double a = grid[i];
    double b = grid[i + 1];
    double ha = hv[i];
    const double hb = hv[i + 1];
    if (!std::isfinite(ha) || !std::isfinite(hb)) continue;
    double root;
    if (ha == 0.0) {
      root = a;
    } else if (hb == 0.0) {
      continue;  // picked up as the left end of the next bracket
    } else if ((ha < 0.0) != (hb < 0.0)) {
      for (int it = 0; it < 200 && b - a > 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a)); ++it) {
        const double mid = 0.5 * (a + b);
        const double hm = h(mid);
        if (hm == 0.0) {
          a = b = mid;
          break;
        }
        if ((hm < 0.0) == (ha < 0.0)) {
          a = mid;
          ha = hm;
        } else {
          b = mid;
        }
      }
      root = 0.5 * (a + b);
    } else {
      continue;
    }
    // Newton polish; keep the bracketed value if Newton wanders off.
    double x = root;
    for (int it = 0; it < 20; ++it) {
      Vector v(1);
      v[0] = x;
      const double slope = model.jacobian(v)(0, 0) - 1.0;
      const double hx = h(x);
      if (std::abs(hx) < 1e-12 || slope == 0.0) break;
      const double next = x - hx / slope;
      if (!std::isfinite(next) || std::abs(next - root) > 1e-6) break;
      x = next;
    }
    if (std::abs(h(x)) > std::abs(h(root))) x = root;
    if (!roots.empty() && std::abs(roots.back() - x) < 1e-6) continue;
    roots.push_back(x);
  }

  for (double r : roots) {
    Vector v(1);
    v[0] = r;
    auto rep = make_report(model, v);
    if (rep.residual < kFixedPointResidual) out.points.push_back(std::move(rep));
  }
  return out;
}

}  // namespace

FixedPointSearch find_fixed_points(const MapModel& model, const Vector& lower, const Vector& upper,
                                   std::size_t seeds_per_axis) {
  const std::size_t d = model.dimension();
  if (static_cast<std::size_t>(lower.size()) != d || static_cast<std::size_t>(upper.size()) != d) {
    throw InvalidArgument("find_fixed_points: box dimension mismatch");
  }
  if (!((upper - lower).array() > 0.0).all()) {
    throw InvalidArgument("find_fixed_points: empty search box");
  }
  if (d > 3) throw InvalidArgument("find_fixed_points: dimension must be <= 3");
  if (d == 1) return fixed_points_1d(model, lower[0], upper[0]);
  if (seeds_per_axis < 1) throw InvalidArgument("find_fixed_points: seeds_per_axis must be >= 1");

  FixedPointSearch out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= seeds_per_axis;

  std::size_t near_zero = 0;
  std::vector<Vector> found;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vector seed(static_cast<Eigen::Index>(d));
    std::size_t rem = idx;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t i = rem % seeds_per_axis;
      rem /= seeds_per_axis;
      const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(seeds_per_axis);
      const auto kk = static_cast<Eigen::Index>(k);
      seed[kk] = lower[kk] + frac * (upper[kk] - lower[kk]);
    }
    const Vector h0 = model.coefficients().values.transpose() * model.library().evaluate(seed) - seed;
    if (h0.allFinite() && h0.norm() < 1e-12) ++near_zero;

    auto x = newton_solve(model, seed);
    if (!x) continue;
    if (((x->array() < lower.array()) || (x->array() > upper.array())).any()) continue;
    const bool dup = std::any_of(found.begin(), found.end(),
                                 [&](const Vector& f) { return (f - *x).norm() < 1e-6; });
    if (!dup) found.push_back(*x);
  }
  if (near_zero == total) {
    out.identity_like = true;
    return out;
  }
  for (const auto& x : found) out.points.push_back(make_report(model, x));
  return out;
}

std::optional<Cycle> detect_cycle(const MapModel& model, const Vector& x0, std::size_t transient,
                                  std::size_t max_period, double tol) {
  if (max_period < 1) throw InvalidArgument("detect_cycle: max_period must be >= 1");
  Vector x = x0;
  if (transient > 0) {
    const Orbit warm = iterate(model, x0, transient);
    if (warm.diverged) {
      throw DivergenceError(
          fmt::format("detect_cycle: orbit diverged after {} of {} transient iterates",
                      warm.size() - 1, transient),
          static_cast<double>(warm.size() - 1));
    }
    x = warm.point(warm.size() - 1);
  }
  const std::size_t window = 4 * max_period + 1;
  const Orbit orbit = iterate(model, x, window - 1);
  if (orbit.diverged) {
    throw DivergenceError("detect_cycle: orbit diverged after the transient",
                          static_cast<double>(transient + orbit.size()));
  }
  for (std::size_t k = 1; k <= max_period; ++k) {
    bool ok = true;
    for (std::size_t n = 0; n < 3 * k && ok; ++n) {
      const double gap = (orbit.points.row(static_cast<Eigen::Index>(n + k)) -
                          orbit.points.row(static_cast<Eigen::Index>(n)))
                             .cwiseAbs()
                             .maxCoeff();
      ok = gap < tol;
    }
    if (ok) {
      Cycle c;
      c.period = k;
      c.points = orbit.points.topRows(static_cast<Eigen::Index>(k));
      return c;
    }
  }
  return std::nullopt;
}

std::size_t band_histogram(const std::vector<double>& iterates, std::size_t bins,
                           std::size_t min_gap) {
  if (iterates.empty()) throw InvalidArgument("band_histogram: no iterates");
  if (bins < 1) throw InvalidArgument("band_histogram: bins must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(iterates.begin(), iterates.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("band_histogram: non-finite iterate");
  }
  if (hi - lo == 0.0) return 1;

  std::vector<bool> occupied(bins, false);
  for (double v : iterates) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    occupied[std::min(b, bins - 1)] = true;
  }
  std::size_t bands = 0;
  std::size_t empty_run = 0;
  bool in_band = false;
  for (bool occ : occupied) {
    if (occ) {
      if (!in_band || empty_run >= min_gap) ++bands;
      in_band = true;
      empty_run = 0;
    } else {
      ++empty_run;
    }
  }
  return bands;
}

double TrainingError::max_abs() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    if (errors.row(i).allFinite()) m = std::max(m, errors.row(i).cwiseAbs().maxCoeff());
  }
  return m;
}

TrainingError training_error(const MapModel& model, const SampleSequence& seq) {
  if (seq.size() == 0) throw InvalidArgument("training_error: empty sample sequence");
  if (seq.dimension() != model.dimension()) {
    throw InvalidArgument("training_error: sequence dimension differs from the model");
  }
  const std::size_t n = seq.size();
  TrainingError out;
  out.errors = RowMatrix::Constant(static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(model.dimension()),
                                   std::numeric_limits<double>::quiet_NaN());
  out.cumulative_l2.assign(n, std::numeric_limits<double>::infinity());

  const Orbit orbit = n > 1 ? iterate(model, seq.sample(0), n - 1) : Orbit{seq.samples.topRows(1), false};
  out.diverged = orbit.diverged;
  double acc = 0.0;
  for (std::size_t k = 0; k < orbit.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    out.errors.row(kk) = seq.samples.row(kk) - orbit.points.row(kk);
    acc += out.errors.row(kk).squaredNorm();
    out.cumulative_l2[k] = std::sqrt(acc);
  }
  return out;
}

std::vector<SweepRow> sparsity_sweep(const FeatureLibrary& library, const Matrix& theta,
                                     const Matrix& x2, const std::vector<double>& lambdas,
                                     const SampleSequence& seq, const StlsqConfig& base,
                                     const std::vector<std::string>& var_names) {
  const auto names = var_names.empty() ? default_var_names(library.dimension()) : var_names;
  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw InvalidArgument("sparsity_sweep: lambdas must be positive");
    StlsqConfig cfg = base;
    cfg.lambda = lambda;
    MapModel model(library, stlsq(theta, x2, cfg, library.fingerprint()), names);

    SweepRow row;
    row.lambda = lambda;
    row.active_terms = model.coefficients().active_terms();
    for (std::size_t j = 0; j < library.size(); ++j) {
      if (model.coefficients().support.row(static_cast<Eigen::Index>(j)).any()) {
        row.terms.push_back(term_name(library.term(j), names));
      }
    }
    const TrainingError err = training_error(model, seq);
    row.diverged = err.diverged;
    row.l2_error = err.diverged ? std::numeric_limits<double>::infinity() : err.l2();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "lambda,active_terms,l2_error,diverged,terms\n";
  for (const auto& r : rows) {
    std::string terms;
    for (const auto& t : r.terms) terms += (terms.empty() ? "" : ";") + t;
    out += fmt::format("{:.17g},{},{:.17g},{},{}\n", r.lambda, r.active_terms, r.l2_error,
                       r.diverged ? 1 : 0, terms);
  }
  return out;
}

}  // namespace psindy
