#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "psindy/errors.hpp"
#include "psindy/section.hpp"

using namespace psindy;

namespace {

HyperplaneSection plane(Vector normal, CrossingDirection dir, std::vector<std::size_t> record) {
  HyperplaneSection h;
  h.normal = std::move(normal);
  h.direction = dir;
  h.record_indices = std::move(record);
  return h;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("strobe samples land on the stored states at each period") {
  const auto sys = builtin_system("rc");
  const Trajectory tr = integrate(sys, Vector::Constant(1, 0.2), 0.0, 10.0, 0.01);
  const SampleSequence seq = strobe_sample(tr, sys, StrobeSection{1.0, 0.0}, "a");
  REQUIRE(seq.size() == 11);
  for (std::size_t n = 0; n < seq.size(); ++n) {
    CHECK(seq.times[n] == doctest::Approx(static_cast<double>(n)));
    CHECK(seq.samples(static_cast<Eigen::Index>(n), 0) == tr.states(static_cast<Eigen::Index>(100 * n), 0));
  }
  CHECK(seq.source_id == "a");
}

TEST_CASE("strobe phases off the grid use dense output") {
  const auto sys = builtin_system("rc");
  const Trajectory tr = integrate(sys, Vector::Constant(1, 0.2), 0.0, 5.0, 0.01);
  const SampleSequence seq = strobe_sample(tr, sys, StrobeSection{1.0, 0.2345}, "");
  REQUIRE(seq.size() == 5);
  CHECK(seq.times.front() == doctest::Approx(0.2345));
  CHECK(seq.samples(0, 0) == doctest::Approx(dense_eval(tr, sys, 0.2345)[0]).epsilon(1e-15));
}

TEST_CASE("crossing times of the harmonic oscillator are exact") {
  const auto sys = testing::oscillator_system();
  const Trajectory tr = integrate(sys, vec({1.0, 0.0}), 0.0, 20.0, 0.01);
  // x = cos t falls through zero at t = pi/2 + 2 pi k.
  const SampleSequence down =
      crossing_sample(sys, tr, plane(vec({1.0, 0.0}), CrossingDirection::kDecreasing, {0, 1}));
  REQUIRE(down.size() == 3);
  for (std::size_t k = 0; k < down.size(); ++k) {
    CHECK(std::abs(down.times[k] - (std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(k))) < 1e-8);
    CHECK(std::abs(down.samples(static_cast<Eigen::Index>(k), 0)) < 1e-8);
    CHECK(down.samples(static_cast<Eigen::Index>(k), 1) == doctest::Approx(-1.0).epsilon(1e-8));
  }
  const SampleSequence both =
      crossing_sample(sys, tr, plane(vec({1.0, 0.0}), CrossingDirection::kBoth, {1}));
  CHECK(both.size() == 6);
  CHECK(both.dimension() == 1);
  const SampleSequence up =
      crossing_sample(sys, tr, plane(vec({1.0, 0.0}), CrossingDirection::kIncreasing, {1}));
  CHECK(up.size() == 3);
  CHECK(up.samples(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("an offset hyperplane is refined to the offset level") {
  const auto sys = testing::oscillator_system();
  const Trajectory tr = integrate(sys, vec({1.0, 0.0}), 0.0, 7.0, 0.01);
  auto h = plane(vec({1.0, 0.0}), CrossingDirection::kDecreasing, {0});
  h.offset = 0.5;
  const SampleSequence s = crossing_sample(sys, tr, h);
  // Decreasing crossings of x = 0.5 at t = acos(0.5) + 2 pi k; only k = 0 lies in [0, 7].
  REQUIRE(s.size() == 1);
  CHECK(std::abs(s.times[0] - std::acos(0.5)) < 1e-8);
  CHECK(std::abs(s.samples(0, 0) - 0.5) < 1e-9);
}

TEST_CASE("the guard keeps only crossings in the positive half-space") {
  const auto sys = builtin_system("hopf");
  const Trajectory tr = integrate(sys, vec({0.5, 0.0}), 0.0, 4.2, 0.01);
  auto h = plane(vec({0.0, 1.0}), CrossingDirection::kBoth, {0});
  const SampleSequence unguarded = crossing_sample(sys, tr, h);
  h.guard_index = 0;
  const SampleSequence guarded = crossing_sample(sys, tr, h);
  CHECK(unguarded.size() > guarded.size());
  for (std::size_t k = 0; k < guarded.size(); ++k) CHECK(guarded.samples(static_cast<Eigen::Index>(k), 0) > 0.0);
}

TEST_CASE("strobe and crossing sampling agree on the autonomized RC circuit") {
  const auto rc = builtin_system("rc");
  const auto ext = testing::extended_rc_system();
  const double x0 = 0.8;
  // A fine step keeps the RK4 phase drift of the (c, s) rotation below the tolerance.
  const Trajectory a = integrate(rc, Vector::Constant(1, x0), 0.0, 12.0, 0.001);
  const Trajectory b = integrate(ext, vec({x0, 1.0, 0.0}), 0.0, 12.0, 0.001);
  const SampleSequence strobe = strobe_sample(a, rc, StrobeSection{1.0, 0.0});
  // s = sin(2 pi t) rises through zero at every integer t > 0.
  const SampleSequence cross =
      crossing_sample(ext, b, plane(vec({0.0, 0.0, 1.0}), CrossingDirection::kIncreasing, {0}));
  REQUIRE(cross.size() >= 10);
  for (std::size_t k = 0; k < cross.size(); ++k) {
    const auto n = static_cast<std::size_t>(std::llround(cross.times[k]));
    CHECK(std::abs(cross.times[k] - static_cast<double>(n)) < 1e-8);
    CHECK(std::abs(cross.samples(static_cast<Eigen::Index>(k), 0) - strobe.samples(static_cast<Eigen::Index>(n), 0)) < 1e-7);
  }
}

TEST_CASE("validate_section rejects malformed specs") {
  CHECK_THROWS_AS(validate_section(StrobeSection{0.0, 0.0}, 1), InvalidArgument);
  CHECK_THROWS_AS(validate_section(plane(vec({0.0, 0.0}), CrossingDirection::kBoth, {0}), 2), InvalidArgument);
  CHECK_THROWS_AS(validate_section(plane(vec({1.0}), CrossingDirection::kBoth, {0}), 2), InvalidArgument);
  CHECK_THROWS_AS(validate_section(plane(vec({1.0, 0.0}), CrossingDirection::kBoth, {}), 2), InvalidArgument);
  CHECK_THROWS_AS(validate_section(plane(vec({1.0, 0.0}), CrossingDirection::kBoth, {1, 0}), 2), InvalidArgument);
  CHECK_THROWS_AS(validate_section(plane(vec({1.0, 0.0}), CrossingDirection::kBoth, {2}), 2), InvalidArgument);
  CHECK_NOTHROW(validate_section(plane(vec({1.0, 0.0}), CrossingDirection::kBoth, {0, 1}), 2));
}

TEST_CASE("build_pairs stacks successive samples without straddling sequences") {
  SampleSequence a, b;
  a.samples.resize(4, 1);
  a.samples << 1, 2, 3, 4;
  a.times = {0, 1, 2, 3};
  b.samples.resize(3, 1);
  b.samples << 10, 20, 30;
  b.times = {0, 1, 2};
  const PairData p = build_pairs({a, b});
  REQUIRE(p.x1.rows() == 5);
  Matrix e1(5, 1), e2(5, 1);
  e1 << 1, 2, 3, 10, 20;
  e2 << 2, 3, 4, 20, 30;
  CHECK(p.x1 == e1);
  CHECK(p.x2 == e2);

  const PairData skipped = build_pairs({a, b}, 2);
  REQUIRE(skipped.x1.rows() == 1);
  CHECK(skipped.x1(0, 0) == 3);
  CHECK(skipped.x2(0, 0) == 4);

  SampleSequence c;
  c.samples.resize(2, 2);
  c.samples.setZero();
  c.times = {0, 1};
  CHECK_THROWS_AS(build_pairs({a, c}), InvalidArgument);
}
