#include "psindy/section.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "psindy/errors.hpp"

namespace psindy {

namespace {

// Hermite interpolant on step [k, k+1], with the knot derivatives precomputed.
struct StepInterpolant {
  double ta, h;
  Vector xa, xb, fa, fb;

  Vector operator()(double t) const {
    const double s = (t - ta) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * xa + ((s3 - 2.0 * s2 + s) * h) * fa +
           (-2.0 * s3 + 3.0 * s2) * xb + ((s3 - s2) * h) * fb;
  }
};

StepInterpolant make_interpolant(const Trajectory& traj, const OdeSystem& system,
                                 std::size_t k) {
  StepInterpolant p;
  p.ta = traj.times[k];
  p.h = traj.times[k + 1] - traj.times[k];
  p.xa = traj.state(k);
  p.xb = traj.state(k + 1);
  p.fa = system.eval(p.ta, p.xa);
  p.fb = system.eval(traj.times[k + 1], p.xb);
  return p;
}

RowMatrix stack_rows(const std::vector<Vector>& rows, std::size_t dim) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return out;
}

}  // namespace

void validate_section(const SectionSpec& spec, std::size_t state_dimension) {
  if (const auto* s = std::get_if<StrobeSection>(&spec)) {
    if (!(s->period > 0.0) || !std::isfinite(s->period)) {
      throw InvalidArgument("strobe section: period must be positive");
    }
    if (!std::isfinite(s->phase)) throw InvalidArgument("strobe section: phase must be finite");
    return;
  }
  const auto& h = std::get<HyperplaneSection>(spec);
  if (static_cast<std::size_t>(h.normal.size()) != state_dimension) {
    throw InvalidArgument(fmt::format("hyperplane section: normal has length {}, state has {}",
                                      h.normal.size(), state_dimension));
  }
  if (!h.normal.allFinite() || h.normal.squaredNorm() == 0.0) {
    throw InvalidArgument("hyperplane section: normal must be finite and nonzero");
  }
  if (h.record_indices.empty()) {
    throw InvalidArgument("hyperplane section: record_indices is empty");
  }
  for (std::size_t i = 0; i < h.record_indices.size(); ++i) {
    if (h.record_indices[i] >= state_dimension) {
      throw InvalidArgument("hyperplane section: record index out of bounds");
    }
    if (i > 0 && h.record_indices[i] <= h.record_indices[i - 1]) {
      throw InvalidArgument("hyperplane section: record_indices must be strictly increasing");
    }
  }
  if (h.guard_index && *h.guard_index >= state_dimension) {
    throw InvalidArgument("hyperplane section: guard index out of bounds");
  }
}

SampleSequence strobe_sample(const Trajectory& traj, const OdeSystem& system,
                             const StrobeSection& spec, std::string source_id) {
  validate_section(spec, traj.dimension());
  if (traj.size() == 0) throw InvalidArgument("strobe_sample: empty trajectory");

  const double t_start = traj.start();
  const double t_end = traj.end();
  const double slack = 1e-9 * std::max(1.0, std::abs(t_end));

  // First strobe index whose instant lies in the span.
  auto k = static_cast<long long>(std::ceil((t_start - spec.phase) / spec.period - 1e-12));
  if (spec.phase + static_cast<double>(k) * spec.period < t_start - slack) ++k;

  std::vector<Vector> rows;
  std::vector<double> times;
  for (;; ++k) {
    const double t = spec.phase + static_cast<double>(k) * spec.period;
    if (t > t_end + slack) break;
    const double tc = std::clamp(t, t_start, t_end);
    const auto j = static_cast<std::size_t>(
        std::clamp<long long>(std::llround((tc - t_start) / traj.step), 0,
                              static_cast<long long>(traj.size()) - 1));
    if (std::abs(traj.times[j] - t) <= slack) {
      rows.push_back(traj.state(j));
    } else {
      rows.push_back(dense_eval(traj, system, tc));
    }
    times.push_back(t);
  }
  if (rows.empty()) {
    throw InvalidArgument(fmt::format("strobe_sample: no strobe instant in [{}, {}]", t_start, t_end));
  }

  SampleSequence seq;
  seq.samples = stack_rows(rows, traj.dimension());
  seq.times = std::move(times);
  seq.source_id = std::move(source_id);
  return seq;
}

SampleSequence crossing_sample(const OdeSystem& system, const Trajectory& traj,
                               const HyperplaneSection& spec, std::string source_id) {
  validate_section(spec, traj.dimension());

  const auto g_of = [&](const Vector& x) { return spec.normal.dot(x) - spec.offset; };
  const double dedup_window = 10.0 * traj.step;

  std::vector<Vector> rows;
  std::vector<double> times;
  const std::size_t n = traj.size();
  if (n < 2) {
    SampleSequence empty;
    empty.samples.resize(0, static_cast<Eigen::Index>(spec.record_indices.size()));
    empty.source_id = std::move(source_id);
    return empty;
  }

  double g_prev = g_of(traj.state(0));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double g_next = g_of(traj.state(k + 1));
    const bool up = g_prev < 0.0 && g_next >= 0.0;
    const bool down = g_prev > 0.0 && g_next <= 0.0;
    const double g_a = g_prev;
    g_prev = g_next;

    if (!(up || down)) continue;
    if (spec.direction == CrossingDirection::kIncreasing && !up) continue;
    if (spec.direction == CrossingDirection::kDecreasing && !down) continue;

    const StepInterpolant interp = make_interpolant(traj, system, k);
    double lo = traj.times[k];
    double hi = traj.times[k + 1];
    double g_lo = g_a;
    double t_star = hi;
    Vector x_star = interp.xb;
    double g_star = g_next;
    for (int it = 0; it < kMaxBisections && std::abs(g_star) >= kCrossingTolerance; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vector x_mid = interp(mid);
      const double g_mid = g_of(x_mid);
      t_star = mid;
      x_star = x_mid;
      g_star = g_mid;
      if ((g_mid < 0.0) == (g_lo < 0.0) && g_mid != 0.0) {
        lo = mid;
        g_lo = g_mid;
      } else {
        hi = mid;
      }
    }

    const double g_dot = spec.normal.dot(system.eval(t_star, x_star));
    if (std::abs(g_dot) < kGrazingTolerance) continue;
    if (spec.direction == CrossingDirection::kIncreasing && g_dot < 0.0) continue;
    if (spec.direction == CrossingDirection::kDecreasing && g_dot > 0.0) continue;
    if (spec.guard_index && !(x_star[static_cast<Eigen::Index>(*spec.guard_index)] > 0.0)) continue;
    if (!times.empty() && t_star - times.back() < dedup_window) continue;

    Vector rec(static_cast<Eigen::Index>(spec.record_indices.size()));
    for (std::size_t i = 0; i < spec.record_indices.size(); ++i) {
      rec[static_cast<Eigen::Index>(i)] = x_star[static_cast<Eigen::Index>(spec.record_indices[i])];
    }
    rows.push_back(std::move(rec));
    times.push_back(t_star);
  }

  SampleSequence seq;
  seq.samples = stack_rows(rows, spec.record_indices.size());
  seq.times = std::move(times);
  seq.source_id = std::move(source_id);
  return seq;
}

SampleSequence sample_section(const OdeSystem& system, const Trajectory& traj,
                              const SectionSpec& spec, std::string source_id) {
  if (const auto* s = std::get_if<StrobeSection>(&spec)) {
    return strobe_sample(traj, system, *s, std::move(source_id));
  }
  return crossing_sample(system, traj, std::get<HyperplaneSection>(spec), std::move(source_id));
}

PairData build_pairs(const std::vector<SampleSequence>& seqs, std::size_t skip) {
  if (seqs.empty()) throw InvalidArgument("build_pairs: no sample sequences");
  const std::size_t d = seqs.front().dimension();
  std::size_t rows = 0;
  for (const auto& s : seqs) {
    if (s.dimension() != d) {
      throw InvalidArgument(fmt::format(
          "build_pairs: sequence '{}' has dimension {}, expected {}", s.source_id, s.dimension(), d));
    }
    if (s.size() > skip + 1) rows += s.size() - skip - 1;
  }

  PairData out;
  out.x1.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  out.x2.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  Eigen::Index r = 0;
  for (const auto& s : seqs) {
    for (std::size_t n = skip; n + 1 < s.size(); ++n, ++r) {
      out.x1.row(r) = s.samples.row(static_cast<Eigen::Index>(n));
      out.x2.row(r) = s.samples.row(static_cast<Eigen::Index>(n + 1));
    }
  }
  return out;
}

}  // namespace psindy
