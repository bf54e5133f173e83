#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sp2bench {

/// Square row-major dense matrix. Used as the verification oracle and as the
/// interchange form for small problems.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}
  DenseMatrix(std::size_t n, std::vector<double> values);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> d);

  std::size_t n() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * n_, n_}; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// |a_ij - a_ji| <= tol * max(1, |a_ij|) for every pair.
  bool is_symmetric(double tol = 1e-12) const noexcept;
  bool all_finite() const noexcept;
  double trace() const noexcept;
  double frobenius_norm() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// ||a - b||_F. Throws DimensionMismatch.
double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b);

/// ||a - b||_F / max(||b||_F, tiny); 0 when both are zero.
double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace sp2bench
