#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "sp2bench/dense_matrix.hpp"
#include "sp2bench/perf/aligned_buffer.hpp"
#include "sp2bench/perf/worker_pool.hpp"

namespace sp2bench {

using Index = std::int32_t;

/// Where ELLPACK operations run and how their outputs are allocated.
///
/// Row r of every result is first written by the worker that owns r under
/// static_partition, so a parallel_first_touch policy places each row on the
/// node of the thread that later computes it.
struct ExecContext {
  perf::WorkerPool* pool = nullptr;  ///< null runs on the calling thread
  perf::AllocPolicy alloc = perf::AllocPolicy::tuned();

  perf::WorkerPool& workers() const { return pool ? *pool : perf::serial_pool(); }
};

/// Row-padded sparse square matrix.
///
/// Each row i owns m_max slots in `values` and `col_index`; the first
/// row_nnz(i) slots hold distinct column indices in [0, n). Unused slots are
/// never read and hold 0.0 / 0.
class EllpackMatrix {
 public:
  EllpackMatrix() = default;
  /// All rows empty.
  EllpackMatrix(std::size_t n, std::size_t m_max, const ExecContext& ctx = {});

  std::size_t n() const noexcept { return n_; }
  std::size_t m_max() const noexcept { return m_max_; }
  /// Byte alignment every backing array start satisfies.
  std::size_t alignment() const noexcept;

  std::size_t row_nnz(std::size_t i) const noexcept { return static_cast<std::size_t>(row_nnz_[i]); }
  std::span<const double> row_values(std::size_t i) const noexcept {
    return {values_.data() + i * m_max_, row_nnz(i)};
  }
  std::span<const Index> row_cols(std::size_t i) const noexcept {
    return {col_index_.data() + i * m_max_, row_nnz(i)};
  }
  std::size_t nnz() const noexcept;

  /// Stored value at (i, j), or 0.
  double at(std::size_t i, std::size_t j) const noexcept;

  /// Replaces row i. Throws OverflowError if cols.size() > m_max and
  /// InvalidArgument on bad or repeated column indices.
  void set_row(std::size_t i, std::span<const Index> cols, std::span<const double> vals);

  /// Full invariant check (counts, index range, distinct columns, canonical padding).
  bool is_valid() const noexcept;

  const double* values_data() const noexcept { return values_.data(); }
  const Index* col_index_data() const noexcept { return col_index_.data(); }
  const Index* row_nnz_data() const noexcept { return row_nnz_.data(); }

 private:
  friend class RowWriter;
  std::size_t n_ = 0;
  std::size_t m_max_ = 0;
  perf::AlignedBuffer<double> values_;
  perf::AlignedBuffer<Index> col_index_;
  perf::AlignedBuffer<Index> row_nnz_;
};

/// Unchecked write access used by kernels that fill disjoint rows in parallel.
class RowWriter {
 public:
  explicit RowWriter(EllpackMatrix& m) noexcept : m_(m) {}
  double* values(std::size_t i) noexcept { return m_.values_.data() + i * m_.m_max_; }
  Index* cols(std::size_t i) noexcept { return m_.col_index_.data() + i * m_.m_max_; }
  void set_nnz(std::size_t i, std::size_t k) noexcept { m_.row_nnz_[i] = static_cast<Index>(k); }

 private:
  EllpackMatrix& m_;
};

/// Largest per-row count of |d_ij| > threshold.
std::size_t max_row_count(const DenseMatrix& d, double threshold);

/// Stores (i, j) iff |d_ij| > threshold. Throws OverflowError naming the first
/// row that needs more than m_max slots.
EllpackMatrix from_dense(const DenseMatrix& d, double threshold, std::size_t m_max,
                         const ExecContext& ctx = {});
DenseMatrix to_dense(const EllpackMatrix& a);

EllpackMatrix identity(std::size_t n, std::size_t m_max, const ExecContext& ctx = {});

/// C = A B with entries |c_ij| <= threshold dropped after each row is fully
/// accumulated. Result width defaults to max(a.m_max, b.m_max).
EllpackMatrix multiply(const EllpackMatrix& a, const EllpackMatrix& b, double threshold,
                       const ExecContext& ctx = {}, std::optional<std::size_t> m_max = {});

/// Smallest width that holds multiply(a, b, threshold) without overflow.
/// Costs about as much as the product itself.
std::size_t product_width(const EllpackMatrix& a, const EllpackMatrix& b, double threshold,
                          const ExecContext& ctx = {});

struct SquareResult {
  EllpackMatrix x2;
  double trace_x = 0.0;
  /// Trace of the stored (thresholded) square.
  double trace_x2 = 0.0;
};

/// X^2 together with tr(X) and tr(X^2) from the same pass over the rows.
SquareResult x_squared(const EllpackMatrix& x, double threshold, const ExecContext& ctx = {},
                       std::optional<std::size_t> m_max = {});

/// alpha A + beta B with post-accumulation pruning.
EllpackMatrix add_scaled(double alpha, const EllpackMatrix& a, double beta, const EllpackMatrix& b,
                         double threshold, const ExecContext& ctx = {},
                         std::optional<std::size_t> m_max = {});

double trace(const EllpackMatrix& a) noexcept;

/// ||A - B||_F.
double fnorm_diff(const EllpackMatrix& a, const EllpackMatrix& b, const ExecContext& ctx = {});

/// Sum of stored values in row-major slot order.
double checksum(const EllpackMatrix& a) noexcept;

/// Bitwise equality of n, m_max, counts, columns and values of stored slots.
bool identical(const EllpackMatrix& a, const EllpackMatrix& b) noexcept;

}  // namespace sp2bench
