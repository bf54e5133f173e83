#pragma once

#include <cstddef>
#include <random>

#include "sp2bench/dense_matrix.hpp"

namespace testing {

// Random symmetric matrix with roughly `density` of the off-diagonal pairs
// set, values uniform in [-1, 1]. Diagonal always set.
inline sp2bench::DenseMatrix random_symmetric(std::size_t n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  sp2bench::DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = val(rng);
    for (std::size_t j = 0; j < i; ++j)
      if (coin(rng) < density) m(i, j) = m(j, i) = val(rng);
  }
  return m;
}

inline sp2bench::DenseMatrix random_dense(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  sp2bench::DenseMatrix m(n);
  for (double& v : m.values()) v = val(rng);
  return m;
}

}  // namespace testing
