#include "sp2bench/ellpack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sp2bench/error.hpp"

namespace sp2bench {

namespace {

constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

// Dense scratch row with a touched-index list. Columns are remembered in the
// order they were first hit, which fixes the output order of every row.
class RowAccumulator {
 public:
  explicit RowAccumulator(std::size_t n) : acc_(n, 0.0), stamp_(n, kNoRow) { touched_.reserve(64); }

  void begin(std::size_t row) {
    row_ = row;
    touched_.clear();
  }

  void add(Index j, double v) {
    const auto u = static_cast<std::size_t>(j);
    if (stamp_[u] != row_) {
      stamp_[u] = row_;
      acc_[u] = v;
      touched_.push_back(j);
    } else {
      acc_[u] += v;
    }
  }

  /// Writes entries with |v| > threshold; returns the count that would be
  /// stored, which exceeds m_max on overflow (nothing beyond m_max is written).
  std::size_t flush(double threshold, double* vals, Index* cols, std::size_t m_max) const {
    std::size_t k = 0;
    for (Index j : touched_) {
      const double v = acc_[static_cast<std::size_t>(j)];
      if (std::fabs(v) > threshold) {
        if (k < m_max) {
          vals[k] = v;
          cols[k] = j;
        }
        ++k;
      }
    }
    return k;
  }

  std::span<const Index> touched() const noexcept { return touched_; }
  double value(Index j) const noexcept { return acc_[static_cast<std::size_t>(j)]; }

 private:
  std::vector<double> acc_;
  std::vector<std::size_t> stamp_;
  std::vector<Index> touched_;
  std::size_t row_ = kNoRow;
};

struct Overflow {
  std::size_t row = kNoRow;
  std::size_t needed = 0;
};

void check_same_order(const EllpackMatrix& a, const EllpackMatrix& b, const char* op) {
  if (a.n() != b.n())
    throw DimensionMismatch(std::string(op) + ": order " + std::to_string(a.n()) + " vs " +
                            std::to_string(b.n()));
}

void check_threshold(double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("threshold must be >= 0");
}

void raise_first(const std::vector<Overflow>& per_worker, std::size_t m_max) {
  const Overflow* first = nullptr;
  for (const auto& o : per_worker)
    if (o.row != kNoRow && (!first || o.row < first->row)) first = &o;
  if (first) throw OverflowError(first->row, first->needed, m_max);
}

// Clears the tail slots of a row that was previously longer. Result rows are
// freshly zeroed, so only partial writes on overflow need this.
void clear_tail(double* vals, Index* cols, std::size_t from, std::size_t m_max) {
  std::fill(vals + from, vals + m_max, 0.0);
  std::fill(cols + from, cols + m_max, Index{0});
}

// Row-parallel sparse product. When `diag` is non-null, diag[i] receives the
// stored (i, i) entry of the product.
EllpackMatrix product(const EllpackMatrix& a, const EllpackMatrix& b, double threshold,
                      const ExecContext& ctx, std::size_t m_max, double* diag) {
  const std::size_t n = a.n();
  EllpackMatrix c(n, m_max, ctx);
  RowWriter out(c);
  perf::WorkerPool& pool = ctx.workers();
  std::vector<Overflow> overflow(pool.size());

  pool.parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t w) {
    RowAccumulator row(n);
    for (std::size_t i = lo; i < hi; ++i) {
      row.begin(i);
      const auto acols = a.row_cols(i);
      const auto avals = a.row_values(i);
      for (std::size_t s = 0; s < acols.size(); ++s) {
        const auto k = static_cast<std::size_t>(acols[s]);
        const double aik = avals[s];
        const auto bcols = b.row_cols(k);
        const auto bvals = b.row_values(k);
        for (std::size_t t = 0; t < bcols.size(); ++t) row.add(bcols[t], aik * bvals[t]);
      }
      const std::size_t k = row.flush(threshold, out.values(i), out.cols(i), m_max);
      if (k > m_max) {
        clear_tail(out.values(i), out.cols(i), 0, m_max);
        overflow[w] = {i, k};
        return;
      }
      out.set_nnz(i, k);
      if (diag) {
        double d = 0.0;
        const Index* cols = out.cols(i);
        for (std::size_t s = 0; s < k; ++s)
          if (static_cast<std::size_t>(cols[s]) == i) d = out.values(i)[s];
        diag[i] = d;
      }
    }
  });
  raise_first(overflow, m_max);
  return c;
}

double sum_in_order(const std::vector<double>& parts) {
  double s = 0.0;
  for (double x : parts) s += x;
  return s;
}

}  // namespace

EllpackMatrix::EllpackMatrix(std::size_t n, std::size_t m_max, const ExecContext& ctx)
    : n_(n),
      m_max_(m_max),
      values_(n * m_max, ctx.alloc.alignment),
      col_index_(n * m_max, ctx.alloc.alignment),
      row_nnz_(n, ctx.alloc.alignment) {
  if (n > static_cast<std::size_t>(std::numeric_limits<Index>::max()))
    throw InvalidDimension("matrix order exceeds index range");
  perf::WorkerPool& pool = ctx.workers();
  const auto mode = ctx.alloc.init_mode;
  // Grain m_max makes the slot partition coincide with the row partition.
  perf::initialize(values_, 0.0, mode, pool, m_max);
  perf::initialize(col_index_, Index{0}, mode, pool, m_max);
  perf::initialize(row_nnz_, Index{0}, mode, pool, 1);
}

std::size_t EllpackMatrix::alignment() const noexcept { return values_.guaranteed_alignment(); }

std::size_t EllpackMatrix::nnz() const noexcept {
  std::size_t total = 0;
  for (std::size_t i = 0; i < n_; ++i) total += row_nnz(i);
  return total;
}

double EllpackMatrix::at(std::size_t i, std::size_t j) const noexcept {
  const auto cols = row_cols(i);
  for (std::size_t s = 0; s < cols.size(); ++s)
    if (static_cast<std::size_t>(cols[s]) == j) return row_values(i)[s];
  return 0.0;
}

void EllpackMatrix::set_row(std::size_t i, std::span<const Index> cols, std::span<const double> vals) {
  if (i >= n_) throw InvalidArgument("row " + std::to_string(i) + " out of range");
  if (cols.size() != vals.size()) throw InvalidArgument("column and value counts differ");
  if (cols.size() > m_max_) throw OverflowError(i, cols.size(), m_max_);
  for (std::size_t s = 0; s < cols.size(); ++s) {
    if (cols[s] < 0 || static_cast<std::size_t>(cols[s]) >= n_)
      throw InvalidArgument("column " + std::to_string(cols[s]) + " out of range in row " +
                            std::to_string(i));
    for (std::size_t t = 0; t < s; ++t)
      if (cols[t] == cols[s])
        throw InvalidArgument("repeated column " + std::to_string(cols[s]) + " in row " +
                              std::to_string(i));
  }
  double* v = values_.data() + i * m_max_;
  Index* c = col_index_.data() + i * m_max_;
  std::copy(vals.begin(), vals.end(), v);
  std::copy(cols.begin(), cols.end(), c);
  clear_tail(v, c, cols.size(), m_max_);
  row_nnz_[i] = static_cast<Index>(cols.size());
}

bool EllpackMatrix::is_valid() const noexcept {
  if (values_.size() != n_ * m_max_ || col_index_.size() != n_ * m_max_ || row_nnz_.size() != n_)
    return false;
  const std::size_t align = alignment();
  if (n_ * m_max_ > 0 && (perf::address_of(values_.data()) % align != 0 ||
                          perf::address_of(col_index_.data()) % align != 0))
    return false;
  std::vector<std::size_t> seen(n_, kNoRow);
  for (std::size_t i = 0; i < n_; ++i) {
    if (row_nnz_[i] < 0 || static_cast<std::size_t>(row_nnz_[i]) > m_max_) return false;
    const std::size_t k = row_nnz(i);
    const Index* c = col_index_.data() + i * m_max_;
    const double* v = values_.data() + i * m_max_;
    for (std::size_t s = 0; s < k; ++s) {
      if (c[s] < 0 || static_cast<std::size_t>(c[s]) >= n_) return false;
      auto& mark = seen[static_cast<std::size_t>(c[s])];
      if (mark == i) return false;
      mark = i;
    }
    for (std::size_t s = k; s < m_max_; ++s)
      if (c[s] != 0 || v[s] != 0.0) return false;
  }
  return true;
}

std::size_t max_row_count(const DenseMatrix& d, double threshold) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const auto r = d.row(i);
    const auto k = static_cast<std::size_t>(
        std::count_if(r.begin(), r.end(), [&](double x) { return std::fabs(x) > threshold; }));
    best = std::max(best, k);
  }
  return best;
}

EllpackMatrix from_dense(const DenseMatrix& d, double threshold, std::size_t m_max,
                         const ExecContext& ctx) {
  check_threshold(threshold);
  const std::size_t n = d.n();
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = d.row(i);
    const auto k = static_cast<std::size_t>(
        std::count_if(r.begin(), r.end(), [&](double x) { return std::fabs(x) > threshold; }));
    if (k > m_max) throw OverflowError(i, k, m_max);
  }
  EllpackMatrix m(n, m_max, ctx);
  RowWriter out(m);
  ctx.workers().parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto r = d.row(i);
      double* v = out.values(i);
      Index* c = out.cols(i);
      std::size_t k = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (std::fabs(r[j]) > threshold) {
          v[k] = r[j];
          c[k] = static_cast<Index>(j);
          ++k;
        }
      out.set_nnz(i, k);
    }
  });
  return m;
}

DenseMatrix to_dense(const EllpackMatrix& a) {
  DenseMatrix d(a.n());
  for (std::size_t i = 0; i < a.n(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t s = 0; s < cols.size(); ++s) d(i, static_cast<std::size_t>(cols[s])) = vals[s];
  }
  return d;
}

EllpackMatrix identity(std::size_t n, std::size_t m_max, const ExecContext& ctx) {
  if (n > 0 && m_max < 1) throw OverflowError(0, 1, m_max);
  EllpackMatrix m(n, m_max, ctx);
  RowWriter out(m);
  ctx.workers().parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) {
      out.values(i)[0] = 1.0;
      out.cols(i)[0] = static_cast<Index>(i);
      out.set_nnz(i, 1);
    }
  });
  return m;
}

EllpackMatrix multiply(const EllpackMatrix& a, const EllpackMatrix& b, double threshold,
                       const ExecContext& ctx, std::optional<std::size_t> m_max) {
  check_same_order(a, b, "multiply");
  check_threshold(threshold);
  return product(a, b, threshold, ctx, m_max.value_or(std::max(a.m_max(), b.m_max())), nullptr);
}

SquareResult x_squared(const EllpackMatrix& x, double threshold, const ExecContext& ctx,
                       std::optional<std::size_t> m_max) {
  check_threshold(threshold);
  const std::size_t n = x.n();
  std::vector<double> diag_x2(n, 0.0);
  SquareResult r;
  r.x2 = product(x, x, threshold, ctx, m_max.value_or(x.m_max()), diag_x2.data());
  r.trace_x = trace(x);
  r.trace_x2 = sum_in_order(diag_x2);
  return r;
}

EllpackMatrix add_scaled(double alpha, const EllpackMatrix& a, double beta, const EllpackMatrix& b,
                         double threshold, const ExecContext& ctx, std::optional<std::size_t> m_max) {
  check_same_order(a, b, "add_scaled");
  check_threshold(threshold);
  const std::size_t n = a.n();
  const std::size_t width = m_max.value_or(std::max(a.m_max(), b.m_max()));
  EllpackMatrix c(n, width, ctx);
  RowWriter out(c);
  perf::WorkerPool& pool = ctx.workers();
  std::vector<Overflow> overflow(pool.size());

  pool.parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t w) {
    RowAccumulator row(n);
    for (std::size_t i = lo; i < hi; ++i) {
      row.begin(i);
      const auto ac = a.row_cols(i);
      const auto av = a.row_values(i);
      for (std::size_t s = 0; s < ac.size(); ++s) row.add(ac[s], alpha * av[s]);
      const auto bc = b.row_cols(i);
      const auto bv = b.row_values(i);
      for (std::size_t s = 0; s < bc.size(); ++s) row.add(bc[s], beta * bv[s]);
      const std::size_t k = row.flush(threshold, out.values(i), out.cols(i), width);
      if (k > width) {
        clear_tail(out.values(i), out.cols(i), 0, width);
        overflow[w] = {i, k};
        return;
      }
      out.set_nnz(i, k);
    }
  });
  raise_first(overflow, width);
  return c;
}

double trace(const EllpackMatrix& a) noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i) t += a.at(i, i);
  return t;
}

double fnorm_diff(const EllpackMatrix& a, const EllpackMatrix& b, const ExecContext& ctx) {
  check_same_order(a, b, "fnorm_diff");
  const std::size_t n = a.n();
  std::vector<double> rows(n, 0.0);
  ctx.workers().parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t) {
    RowAccumulator row(n);
    for (std::size_t i = lo; i < hi; ++i) {
      row.begin(i);
      const auto ac = a.row_cols(i);
      const auto av = a.row_values(i);
      for (std::size_t s = 0; s < ac.size(); ++s) row.add(ac[s], av[s]);
      const auto bc = b.row_cols(i);
      const auto bv = b.row_values(i);
      for (std::size_t s = 0; s < bc.size(); ++s) row.add(bc[s], -bv[s]);
      double ss = 0.0;
      for (Index j : row.touched()) {
        const double v = row.value(j);
        ss += v * v;
      }
      rows[i] = ss;
    }
  });
  return std::sqrt(sum_in_order(rows));
}

double checksum(const EllpackMatrix& a) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i)
    for (double v : a.row_values(i)) s += v;
  return s;
}

bool identical(const EllpackMatrix& a, const EllpackMatrix& b) noexcept {
  if (a.n() != b.n() || a.m_max() != b.m_max()) return false;
  for (std::size_t i = 0; i < a.n(); ++i) {
    if (a.row_nnz(i) != b.row_nnz(i)) return false;
    const auto ac = a.row_cols(i), bc = b.row_cols(i);
    const auto av = a.row_values(i), bv = b.row_values(i);
    if (!std::equal(ac.begin(), ac.end(), bc.begin())) return false;
    for (std::size_t s = 0; s < av.size(); ++s)
      if (std::bit_cast<std::uint64_t>(av[s]) != std::bit_cast<std::uint64_t>(bv[s])) return false;
  }
  return true;
}

std::size_t product_width(const EllpackMatrix& a, const EllpackMatrix& b, double threshold,
                          const ExecContext& ctx) {
  check_same_order(a, b, "product_width");
  check_threshold(threshold);
  const std::size_t n = a.n();
  perf::WorkerPool& pool = ctx.workers();
  std::vector<std::size_t> widest(pool.size(), 0);
  pool.parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t w) {
    RowAccumulator row(n);
    for (std::size_t i = lo; i < hi; ++i) {
      row.begin(i);
      const auto acols = a.row_cols(i);
      const auto avals = a.row_values(i);
      for (std::size_t s = 0; s < acols.size(); ++s) {
        const auto k = static_cast<std::size_t>(acols[s]);
        const auto bcols = b.row_cols(k);
        const auto bvals = b.row_values(k);
        for (std::size_t t = 0; t < bcols.size(); ++t) row.add(bcols[t], avals[s] * bvals[t]);
      }
      widest[w] = std::max(widest[w], row.flush(threshold, nullptr, nullptr, 0));
    }
  });
  return std::max<std::size_t>(1, *std::max_element(widest.begin(), widest.end()));
}

}  // namespace sp2bench
