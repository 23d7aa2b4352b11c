#include <doctest.h>

#include <numeric>

#include "../oracles.hpp"
#include "helpers.hpp"
#include "psindy/errors.hpp"
#include "psindy/features.hpp"
#include "psindy/regression.hpp"

using namespace psindy;

TEST_CASE("least_squares matches the pseudo-inverse oracle on full-rank systems") {
  Xorshift64Star rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testing::random_matrix(rng, 30, 6);
    const Matrix b = testing::random_matrix(rng, 30, 2);
    CHECK((least_squares(a, b) - oracle::pinv_solve(a, b)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("rank-deficient systems get a basic solution with the optimal residual") {
  Xorshift64Star rng(12);
  Matrix a = testing::random_matrix(rng, 25, 5);
  a.col(4) = a.col(0) + a.col(1);
  a.col(3) = 2.0 * a.col(2);
  const Matrix b = testing::random_matrix(rng, 25, 1);
  const Matrix x = least_squares(a, b);
  const Matrix ref = oracle::pinv_solve(a, b);
  CHECK((a * x - b).norm() == doctest::Approx((a * ref - b).norm()).epsilon(1e-10));
  CHECK((x.array() == 0.0).count() >= 2);
}

TEST_CASE("ridge solves the augmented normal equations") {
  Xorshift64Star rng(13);
  const Matrix a = testing::random_matrix(rng, 20, 4);
  const Matrix b = testing::random_matrix(rng, 20, 1);
  const double rho = 0.3;
  const Matrix ref = (a.transpose() * a + rho * Matrix::Identity(4, 4)).ldlt().solve(a.transpose() * b);
  CHECK((least_squares(a, b, rho) - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("least_squares rejects mismatched or non-finite input") {
  CHECK_THROWS_AS(least_squares(Matrix::Zero(3, 2), Matrix::Zero(4, 1)), InvalidArgument);
  Matrix a = Matrix::Ones(3, 2);
  a(0, 0) = std::nan("");
  CHECK_THROWS_AS(least_squares(a, Matrix::Zero(3, 1)), InvalidArgument);
}

TEST_CASE("stlsq config validation") {
  CHECK_THROWS_AS(validate(StlsqConfig{0.0, 25, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(StlsqConfig{-1.0, 25, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(StlsqConfig{0.1, 0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(StlsqConfig{0.1, 5, -0.5}), InvalidArgument);
  CHECK_NOTHROW(validate(StlsqConfig{}));
}

TEST_CASE("stlsq survivors exceed lambda and the support only shrinks") {
  Xorshift64Star rng(21);
  const auto lib = build_library(2, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix x1 = testing::random_matrix(rng, 60, 2);
    const Matrix x2 = testing::random_matrix(rng, 60, 2);
    const double lambda = rng.uniform(0.01, 0.5);
    const CoefficientMatrix xi = stlsq(lib, x1, x2, StlsqConfig{lambda, 25, 0.0});
    CHECK(xi.library_fingerprint == lib.fingerprint());
    CHECK(xi.lambda == lambda);
    for (Eigen::Index j = 0; j < 2; ++j) {
      for (Eigen::Index i = 0; i < xi.values.rows(); ++i) {
        CHECK(xi.support(i, j) == (xi.values(i, j) != 0.0));
        if (xi.support(i, j)) CHECK(std::abs(xi.values(i, j)) > lambda);
      }
      const auto& h = xi.support_history[static_cast<std::size_t>(j)];
      CHECK(h.front() == lib.size());
      CHECK(std::is_sorted(h.rbegin(), h.rend()));
      CHECK(xi.empty_columns[static_cast<std::size_t>(j)] == !xi.support.col(j).any());
    }
  }
}

TEST_CASE("stlsq with a tiny threshold reproduces least squares") {
  Xorshift64Star rng(22);
  const Matrix theta = testing::random_matrix(rng, 40, 5, 1.0, 2.0);
  Vector truth(5);
  truth << 3.0, -2.0, 1.5, 4.0, -1.0;
  const Matrix x2 = theta * truth;
  const CoefficientMatrix xi = stlsq(theta, x2, StlsqConfig{1e-9, 25, 0.0});
  CHECK((xi.values.col(0) - truth).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(xi.active_terms() == 5);
}

TEST_CASE("a threshold above every coefficient empties the columns") {
  Xorshift64Star rng(23);
  const Matrix theta = testing::random_matrix(rng, 30, 4);
  const Matrix x2 = theta * Vector::Constant(4, 0.1);
  const CoefficientMatrix xi = stlsq(theta, x2, StlsqConfig{10.0, 25, 0.0});
  CHECK(xi.active_terms() == 0);
  CHECK(xi.empty_columns[0]);
}

TEST_CASE("stlsq is invariant under row permutations of the data") {
  Xorshift64Star rng(24);
  const auto lib = build_library(1, 4);
  const Matrix x1 = testing::random_matrix(rng, 50, 1);
  Matrix x2 = 0.5 * x1.array() - 0.8 * x1.array().cube() + 0.05 * testing::random_matrix(rng, 50, 1).array();
  std::vector<Eigen::Index> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1))]);
  }
  Matrix p1(50, 1), p2(50, 1);
  for (Eigen::Index i = 0; i < 50; ++i) {
    p1.row(i) = x1.row(perm[static_cast<std::size_t>(i)]);
    p2.row(i) = x2.row(perm[static_cast<std::size_t>(i)]);
  }
  const StlsqConfig cfg{0.1, 25, 0.0};
  const CoefficientMatrix a = stlsq(lib, x1, x2, cfg);
  const CoefficientMatrix b = stlsq(lib, p1, p2, cfg);
  CHECK(a.support == b.support);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("the iteration cap stops re-solving") {
  Xorshift64Star rng(25);
  const Matrix theta = testing::random_matrix(rng, 40, 8);
  const Matrix x2 = testing::random_matrix(rng, 40, 1);
  const CoefficientMatrix one = stlsq(theta, x2, StlsqConfig{0.15, 1, 0.0});
  CHECK(one.iterations[0] <= 1);
  CHECK(one.support_history[0].size() <= 3);
}

TEST_CASE("planted sparse maps are recovered exactly") {
  Xorshift64Star rng(26);
  const auto lib = build_library(2, 3);
  const Matrix x1 = testing::random_matrix(rng, static_cast<Eigen::Index>(4 * lib.size()), 2);
  Matrix xi_true = Matrix::Zero(static_cast<Eigen::Index>(lib.size()), 2);
  xi_true(1, 0) = 0.9;
  xi_true(4, 0) = -0.4;
  xi_true(0, 1) = 0.3;
  xi_true(9, 1) = 1.2;
  const Matrix x2 = lib.evaluate(x1) * xi_true;
  const CoefficientMatrix xi = stlsq(lib, x1, x2, StlsqConfig{0.05, 25, 0.0});
  CHECK(xi.support == (xi_true.array() != 0.0).matrix());
  CHECK((xi.values - xi_true).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(residual_rms(lib.evaluate(x1), xi, x2).maxCoeff() < 1e-12);
}
