#include "psindy/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "psindy/errors.hpp"

namespace psindy {

int Monomial::degree() const noexcept {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

double Monomial::eval(const Vector& x) const {
  double v = 1.0;
  for (std::size_t k = 0; k < exponents.size(); ++k) {
    const double xk = x[static_cast<Eigen::Index>(k)];
    for (int e = 0; e < exponents[k]; ++e) v *= xk;
  }
  return v;
}

std::string term_name(const Monomial& m, const std::vector<std::string>& var_names) {
  if (var_names.size() != m.exponents.size()) {
    throw InvalidArgument(fmt::format("term_name: {} names for {} variables", var_names.size(),
                                      m.exponents.size()));
  }
  std::string out;
  for (std::size_t k = 0; k < m.exponents.size(); ++k) {
    const int e = m.exponents[k];
    if (e == 0) continue;
    if (!out.empty()) out += '*';
    out += var_names[k];
    if (e > 1) out += fmt::format("^{}", e);
  }
  return out.empty() ? "1" : out;
}

std::vector<std::string> default_var_names(std::size_t d) {
  if (d <= 3) {
    std::vector<std::string> names{"x", "y", "z"};
    names.resize(d);
    return names;
  }
  std::vector<std::string> names;
  for (std::size_t k = 1; k <= d; ++k) names.push_back(fmt::format("x{}", k));
  return names;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {

// Exponent vectors of total degree `deg` in d variables, first exponent
// largest first (descending lexicographic order).
void enumerate_degree(std::size_t d, int deg, std::vector<int>& current, std::size_t pos,
                      std::vector<Monomial>& out) {
  if (pos + 1 == d) {
    current[pos] = deg;
    out.push_back(Monomial{current});
    return;
  }
  for (int e = deg; e >= 0; --e) {
    current[pos] = e;
    enumerate_degree(d, deg - e, current, pos + 1, out);
  }
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

FeatureLibrary::FeatureLibrary(std::size_t dimension, int max_degree)
    : dimension_(dimension), max_degree_(max_degree) {
  if (dimension == 0) throw InvalidArgument("feature library: dimension must be >= 1");
  if (max_degree < 1) throw InvalidArgument("feature library: max degree must be >= 1");

  std::vector<int> current(dimension, 0);
  for (int deg = 0; deg <= max_degree; ++deg) enumerate_degree(dimension, deg, current, 0, terms_);

  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, dimension_);
  h = fnv1a(h, static_cast<std::uint64_t>(max_degree_));
  for (const auto& t : terms_) {
    for (int e : t.exponents) h = fnv1a(h, static_cast<std::uint64_t>(e));
  }
  fingerprint_ = h;
}

Matrix FeatureLibrary::evaluate(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != dimension_) {
    throw InvalidArgument(fmt::format("evaluate_library: input has {} columns, library expects {}",
                                      x.cols(), dimension_));
  }
  if (!x.allFinite()) throw InvalidArgument("evaluate_library: non-finite input");

  const Eigen::Index m = x.rows();
  Matrix theta(m, static_cast<Eigen::Index>(terms_.size()));
  // Per-variable power tables make each entry a product of d lookups.
  std::vector<Matrix> powers(dimension_);
  for (std::size_t k = 0; k < dimension_; ++k) {
    powers[k].resize(m, max_degree_ + 1);
    powers[k].col(0).setOnes();
    for (int e = 1; e <= max_degree_; ++e) {
      powers[k].col(e) = powers[k].col(e - 1).cwiseProduct(x.col(static_cast<Eigen::Index>(k)));
    }
  }
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    auto col = theta.col(static_cast<Eigen::Index>(j));
    col.setOnes();
    for (std::size_t k = 0; k < dimension_; ++k) {
      const int e = terms_[j].exponents[k];
      if (e > 0) col = col.cwiseProduct(powers[k].col(e));
    }
  }
  return theta;
}

Vector FeatureLibrary::evaluate(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension_) {
    throw InvalidArgument("evaluate_library: state dimension mismatch");
  }
  // Same power tables and product order as the matrix path, so a row of
  // Theta(X) and Theta(x) agree bit for bit.
  Matrix powers(x.size(), max_degree_ + 1);
  powers.col(0).setOnes();
  for (int e = 1; e <= max_degree_; ++e) powers.col(e) = powers.col(e - 1).cwiseProduct(x);

  Vector row(static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    double v = 1.0;
    for (std::size_t k = 0; k < dimension_; ++k) {
      const int e = terms_[j].exponents[k];
      if (e > 0) v *= powers(static_cast<Eigen::Index>(k), e);
    }
    row[static_cast<Eigen::Index>(j)] = v;
  }
  return row;
}

}  // namespace psindy
