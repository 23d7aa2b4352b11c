#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "psindy/dynamics.hpp"

namespace psindy {

/// Multivariate monomial x_1^e_1 * ... * x_d^e_d.
struct Monomial {
  std::vector<int> exponents;

  int degree() const noexcept;
  double eval(const Vector& x) const;
  bool operator==(const Monomial&) const = default;
};

/// Human-readable name, e.g. "1", "x", "x^2*y".
std::string term_name(const Monomial& m, const std::vector<std::string>& var_names);

/// Default variable names: "x" for d = 1, "x", "y", "z" for d <= 3, else "x1".."xd".
std::vector<std::string> default_var_names(std::size_t d);

/// All monomials of total degree <= max_degree in d variables, in graded
/// lexicographic order: ascending degree, then descending exponent vectors
/// (x1 before x2) within a degree. terms()[0] is the constant.
class FeatureLibrary {
 public:
  FeatureLibrary(std::size_t dimension, int max_degree);

  std::size_t dimension() const noexcept { return dimension_; }
  int max_degree() const noexcept { return max_degree_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<Monomial>& terms() const noexcept { return terms_; }
  const Monomial& term(std::size_t j) const { return terms_.at(j); }

  /// Theta(X): row i, column j holds term j evaluated at row i of X.
  Matrix evaluate(const Matrix& x) const;
  /// Theta(x) for one state, as a row-aligned vector of length size().
  Vector evaluate(const Vector& x) const;

  /// FNV-1a hash of (dimension, max_degree, exponent list).
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  bool operator==(const FeatureLibrary& o) const {
    return dimension_ == o.dimension_ && max_degree_ == o.max_degree_ && terms_ == o.terms_;
  }

 private:
  std::size_t dimension_;
  int max_degree_;
  std::vector<Monomial> terms_;
  std::uint64_t fingerprint_;
};

inline FeatureLibrary build_library(std::size_t d, int max_degree) {
  return FeatureLibrary(d, max_degree);
}

/// C(n, k) as an exact integer.
std::size_t binomial(std::size_t n, std::size_t k);

}  // namespace psindy
