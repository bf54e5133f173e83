#include "sp2bench/dense_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sp2bench/error.hpp"

namespace sp2bench::oracle {

namespace {

// Householder reduction of the symmetric matrix held in v (row-major, n x n)
// to tridiagonal form. On return d holds the diagonal, e the subdiagonal in
// e[1..n-1], and v the accumulated orthogonal transform (columns).
void tridiagonalize(std::vector<double>& v, std::size_t n, std::vector<double>& d,
                    std::vector<double>& e) {
  auto V = [&](std::size_t r, std::size_t c) -> double& { return v[r * n + c]; };
  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::fabs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) V(k, j) -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e). w holds the transform
// transposed: row k of w is column k of the transform, so the plane
// rotations touch contiguous memory.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, std::vector<double>& w,
                 std::size_t n) {
  auto row = [&](std::size_t r) { return w.data() + r * n; };
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::fabs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxQlIterations)
          throw ConvergenceFailure("QL iteration did not converge for eigenvalue " +
                                   std::to_string(l));
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          double* wi = row(ii);
          double* wj = row(ii + 1);
          for (std::size_t k = 0; k < n; ++k) {
            const double t = wj[k];
            wj[k] = s * wi[k] + c * t;
            wi[k] = c * wi[k] - s * t;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::fabs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

DenseMatrix dense_multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.n() != b.n()) throw DimensionMismatch("dense_multiply: order mismatch");
  const std::size_t n = a.n();
  DenseMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      const auto bk = b.row(k);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

EigenDecomposition eigh(const DenseMatrix& h) {
  const std::size_t n = h.n();
  EigenDecomposition out{{}, DenseMatrix(n)};
  if (n == 0) return out;
  if (!h.all_finite()) throw InvalidArgument("eigh: non-finite input");

  // Symmetrize from the lower triangle.
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) v[i * n + j] = v[j * n + i] = h(i, j);

  std::vector<double> d(n), e(n);
  tridiagonalize(v, n, d, e);

  std::vector<double> w(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) w[c * n + r] = v[r * n + c];
  ql_implicit(d, e, w, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[order[k]];
    const double* src = w.data() + order[k] * n;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = src[r];
  }
  return out;
}

DenseMatrix density_from(const EigenDecomposition& eig, std::size_t n_occ) {
  const std::size_t n = eig.values.size();
  if (n_occ > n) throw InvalidArgument("n_occ exceeds matrix order");
  if (n_occ > 0 && n_occ < n && eig.values[n_occ] - eig.values[n_occ - 1] <= 1e-10)
    throw DegenerateGap("no gap between eigenvalues " + std::to_string(n_occ - 1) + " and " +
                        std::to_string(n_occ));
  DenseMatrix dm(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto qr = eig.vectors.row(r);
    for (std::size_t c = 0; c <= r; ++c) {
      const auto qc = eig.vectors.row(c);
      double s = 0.0;
      for (std::size_t k = 0; k < n_occ; ++k) s += qr[k] * qc[k];
      dm(r, c) = s;
      dm(c, r) = s;
    }
  }
  return dm;
}

DenseMatrix exact_density_matrix(const DenseMatrix& h, std::size_t n_occ) {
  if (n_occ > h.n()) throw InvalidArgument("n_occ exceeds matrix order");
  return density_from(eigh(h), n_occ);
}

}  // namespace sp2bench::oracle
