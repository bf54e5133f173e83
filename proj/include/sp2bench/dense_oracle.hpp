#pragma once

#include <cstddef>
#include <vector>

#include "sp2bench/dense_matrix.hpp"

namespace sp2bench::oracle {

// Small-scale dense references used to verify the sparse kernels and the SP2
// solver. None of these are tuned for speed.

/// Eigenvalues ascending; column k of `vectors` is the unit eigenvector of
/// values[k].
struct EigenDecomposition {
  std::vector<double> values;
  DenseMatrix vectors;
};

/// Plain i-k-j triple loop. Throws DimensionMismatch.
DenseMatrix dense_multiply(const DenseMatrix& a, const DenseMatrix& b);

/// Symmetric eigensolver: Householder reduction to tridiagonal form followed
/// by implicit-shift QL. Only the lower triangle is read. Throws
/// ConvergenceFailure if any eigenvalue needs more than kMaxQlIterations.
EigenDecomposition eigh(const DenseMatrix& h);

inline constexpr int kMaxQlIterations = 60;

/// Projector onto the n_occ lowest eigenvectors. Throws DegenerateGap when
/// lambda[n_occ] - lambda[n_occ - 1] <= 1e-10 and InvalidArgument when
/// n_occ > n.
DenseMatrix exact_density_matrix(const DenseMatrix& h, std::size_t n_occ);
DenseMatrix density_from(const EigenDecomposition& eig, std::size_t n_occ);

}  // namespace sp2bench::oracle
