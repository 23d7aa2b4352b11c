#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "../oracles.hpp"
#include "helpers.hpp"
#include "psindy/errors.hpp"
#include "psindy/mapmodel.hpp"

using namespace psindy;

namespace {

MapModel make_model(std::size_t d, int degree, const Matrix& values) {
  FeatureLibrary lib = build_library(d, degree);
  CoefficientMatrix xi;
  xi.values = values;
  xi.support = values.array() != 0.0;
  xi.library_fingerprint = lib.fingerprint();
  return MapModel(std::move(lib), std::move(xi));
}

// x -> r x (1 - x) in the degree-2 library [1, x, x^2].
MapModel logistic_map(double r) {
  Matrix v(3, 1);
  v << 0.0, r, -r;
  return make_model(1, 2, v);
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("construction checks shape and fingerprint") {
  FeatureLibrary lib = build_library(1, 2);
  CoefficientMatrix bad;
  bad.values = Matrix::Zero(4, 1);
  bad.library_fingerprint = lib.fingerprint();
  CHECK_THROWS_AS(MapModel(lib, bad), InvalidArgument);
  CoefficientMatrix other;
  other.values = Matrix::Zero(3, 1);
  other.library_fingerprint = build_library(1, 3).fingerprint();
  CHECK_THROWS_AS(MapModel(lib, other), InvalidArgument);
}

TEST_CASE("apply evaluates Theta(x) Xi") {
  const MapModel m = logistic_map(3.0);
  CHECK(m.apply(vec({0.2}))[0] == doctest::Approx(0.48));
  CHECK_THROWS_AS(m.apply(vec({0.2, 0.1})), InvalidArgument);
  CHECK(m.describe(0) == "3*x - 3*x^2");
}

TEST_CASE("Jacobian agrees with central finite differences") {
  Xorshift64Star rng(31);
  for (std::size_t d = 1; d <= 3; ++d) {
    const auto lib = build_library(d, 4);
    const Matrix values = testing::random_matrix(rng, static_cast<Eigen::Index>(lib.size()), static_cast<Eigen::Index>(d));
    const MapModel m = make_model(d, 4, values);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector x = testing::random_matrix(rng, static_cast<Eigen::Index>(d), 1).col(0);
      const Matrix jac = m.jacobian(x);
      const Matrix fd = oracle::fd_jacobian([&](const Vector& z) { return m.apply(z); }, x);
      CHECK((jac - fd).norm() / std::max(1.0, jac.norm()) < 1e-6);
    }
  }
}

TEST_CASE("eigenvalues in closed form and via the general solver") {
  const auto ev1 = eigenvalues(Matrix::Constant(1, 1, -0.5));
  CHECK(ev1[0] == std::complex<double>(-0.5, 0.0));

  Matrix rot(2, 2);
  rot << 0.0, -2.0, 2.0, 0.0;
  const auto ev2 = eigenvalues(rot);
  CHECK(std::abs(ev2[0].imag()) == doctest::Approx(2.0));
  CHECK(ev2[0].real() == doctest::Approx(0.0));

  Matrix tri(2, 2);
  tri << 1e8, 1.0, 0.0, 1e-8;
  const auto ev3 = eigenvalues(tri);
  CHECK(ev3[1].real() == doctest::Approx(1e-8).epsilon(1e-12));

  Matrix m3(3, 3);
  m3 << 2, 1, 0, 0, 3, 1, 0, 0, -1;
  auto ev = eigenvalues(m3);
  std::vector<double> re;
  for (auto z : ev) re.push_back(z.real());
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-1.0));
  CHECK(re[1] == doctest::Approx(2.0));
  CHECK(re[2] == doctest::Approx(3.0));
  CHECK_THROWS_AS(eigenvalues(Matrix::Identity(4, 4)), InvalidArgument);
}

TEST_CASE("stability classification with an indeterminate band") {
  using C = std::complex<double>;
  CHECK(classify({C(0.5, 0.0), C(-0.9, 0.0)}) == Stability::kStable);
  CHECK(classify({C(0.5, 0.0), C(0.0, 1.2)}) == Stability::kUnstable);
  CHECK(classify({C(1.0 + 1e-10, 0.0)}) == Stability::kIndeterminate);
  CHECK(to_string(Stability::kStable) == "stable");
}

TEST_CASE("logistic map fixed points and their stability") {
  const MapModel m = logistic_map(2.5);
  const FixedPointSearch s = find_fixed_points(m, vec({-0.2}), vec({1.5}));
  REQUIRE(s.points.size() == 2);
  CHECK(std::abs(s.points[0].location[0]) < 1e-12);
  CHECK(s.points[0].stability == Stability::kUnstable);
  CHECK(s.points[1].location[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(s.points[1].stable());
  CHECK(s.points[1].multipliers[0].real() == doctest::Approx(-0.5));
  for (const auto& p : s.points) CHECK(p.residual < 1e-9);
}

TEST_CASE("stable fixed points attract nearby iterates") {
  const MapModel m = logistic_map(2.8);
  const auto s = find_fixed_points(m, vec({-0.2}), vec({1.5}));
  for (const auto& p : s.points) {
    if (!p.stable()) continue;
    const Orbit o = iterate(m, p.location + vec({0.01}), 200);
    CHECK(std::abs(o.points(200, 0) - p.location[0]) < 1e-10);
  }
}

TEST_CASE("two-dimensional fixed point search") {
  // (x, y) -> (0.5 x + 0.1 y + 1, -0.2 x + 0.3 y): unique fixed point.
  Matrix v = Matrix::Zero(3, 2);
  v << 1.0, 0.0, 0.5, -0.2, 0.1, 0.3;
  const MapModel m = make_model(2, 1, v);
  const auto s = find_fixed_points(m, vec({-5.0, -5.0}), vec({5.0, 5.0}));
  REQUIRE(s.points.size() == 1);
  const Vector x = s.points[0].location;
  CHECK((m.apply(x) - x).norm() < 1e-12);
  CHECK(s.points[0].stable());
}

TEST_CASE("the identity map is reported rather than enumerated") {
  Matrix v(2, 1);
  v << 0.0, 1.0;
  const MapModel id1 = make_model(1, 1, v);
  CHECK(find_fixed_points(id1, vec({-1.0}), vec({1.0})).identity_like);
  Matrix v2 = Matrix::Zero(3, 2);
  v2(1, 0) = 1.0;
  v2(2, 1) = 1.0;
  CHECK(find_fixed_points(make_model(2, 1, v2), vec({-1.0, -1.0}), vec({1.0, 1.0})).identity_like);
}

TEST_CASE("planted cycles are detected with their least period") {
  CHECK(detect_cycle(logistic_map(2.5), vec({0.3}), 500, 64)->period == 1);
  CHECK(detect_cycle(logistic_map(3.2), vec({0.3}), 500, 64)->period == 2);
  CHECK(detect_cycle(logistic_map(3.5), vec({0.3}), 500, 64)->period == 4);
  CHECK(detect_cycle(logistic_map(3.83), vec({0.3}), 2000, 64)->period == 3);
  CHECK_FALSE(detect_cycle(logistic_map(4.0), vec({0.3}), 500, 64).has_value());
  const auto c = detect_cycle(logistic_map(3.2), vec({0.3}), 500, 64);
  CHECK(c->points.rows() == 2);
  CHECK(std::abs(c->points(0, 0) - c->points(1, 0)) > 0.1);
}

TEST_CASE("escaping orbits are flagged") {
  const MapModel m = logistic_map(3.0);
  const Orbit o = iterate(m, vec({2.0}), 100);
  CHECK(o.diverged);
  CHECK(o.size() < 101);
  CHECK(o.points.allFinite());
  CHECK_THROWS_AS(detect_cycle(m, vec({2.0}), 10, 8), DivergenceError);
}

TEST_CASE("band histogram counts separated clusters and ignores order") {
  Xorshift64Star rng(41);
  std::vector<double> xs;
  for (int i = 0; i < 2000; ++i) xs.push_back(rng.uniform(0.0, 1.0));
  for (int i = 0; i < 2000; ++i) xs.push_back(rng.uniform(2.0, 3.0));
  for (int i = 0; i < 2000; ++i) xs.push_back(rng.uniform(5.0, 5.5));
  CHECK(band_histogram(xs) == 3);
  std::vector<double> shuffled = xs;
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    std::swap(shuffled[i], shuffled[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1))]);
  }
  CHECK(band_histogram(shuffled) == 3);
  std::vector<double> solid;
  for (int i = 0; i < 5000; ++i) solid.push_back(rng.uniform(-1.0, 1.0));
  CHECK(band_histogram(solid) == 1);
  CHECK(band_histogram({1.0, 1.0}) == 1);
  CHECK_THROWS_AS(band_histogram({}), InvalidArgument);
}

TEST_CASE("chaotic logistic iterates at r = 3.6 form two bands") {
  const Orbit o = iterate(logistic_map(3.6), vec({0.3}), 6000);
  std::vector<double> xs;
  for (std::size_t n = 1000; n < o.size(); ++n) xs.push_back(o.points(static_cast<Eigen::Index>(n), 0));
  CHECK(band_histogram(xs) == 2);
}

TEST_CASE("training error vanishes for the generating map") {
  const MapModel m = logistic_map(2.9);
  const Orbit o = iterate(m, vec({0.1}), 30);
  SampleSequence seq;
  seq.samples = o.points;
  seq.times.resize(o.size());
  const TrainingError err = training_error(m, seq);
  CHECK(err.l2() == 0.0);
  CHECK_FALSE(err.diverged);
  CHECK(err.cumulative_l2.size() == 31);
}

TEST_CASE("sparsity sweep reports one row per lambda") {
  const MapModel truth = logistic_map(2.9);
  const Orbit o = iterate(truth, vec({0.01}), 60);
  SampleSequence seq;
  seq.samples = o.points;
  seq.times.resize(o.size());
  const PairData pairs = build_pairs({seq});
  const auto lib = build_library(1, 4);
  const auto rows = sparsity_sweep(lib, lib.evaluate(pairs.x1), pairs.x2, {1.0, 0.1, 0.01}, seq);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].active_terms == 2);
  CHECK(rows[2].terms == std::vector<std::string>{"x", "x^2"});
  CHECK(rows[2].l2_error < 1e-8);
  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("lambda,active_terms,l2_error,diverged,terms\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
