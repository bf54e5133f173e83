#include "sp2bench/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sp2bench/error.hpp"

namespace sp2bench {

DenseMatrix::DenseMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  if (values_.size() != n * n)
    throw DimensionMismatch("dense matrix of order " + std::to_string(n) + " needs " +
                            std::to_string(n * n) + " values, got " + std::to_string(values_.size()));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
  DenseMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

bool DenseMatrix::is_symmetric(double tol) const noexcept {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double a = (*this)(i, j);
      if (std::fabs(a - (*this)(j, i)) > tol * std::max(1.0, std::fabs(a))) return false;
    }
  return true;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double DenseMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double DenseMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double x : values_) s += x * x;
  return std::sqrt(s);
}

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.n() != b.n()) throw DimensionMismatch("frobenius_distance: order mismatch");
  double s = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t k = 0; k < va.size(); ++k) {
    const double d = va[k] - vb[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b) {
  const double diff = frobenius_distance(a, b);
  const double ref = b.frobenius_norm();
  if (ref == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / ref;
}

}  // namespace sp2bench
