#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sp2bench/dense_matrix.hpp"
#include "sp2bench/ellpack.hpp"

namespace sp2bench {

// Chain-of-dimers tight-binding model.
//
// Orbitals are interleaved [A0, B0, A1, B1, ...]; orbital o sits on dimer o/2.
// Between orbitals on dimers p and q the coupling is
//
//   delta * (1 + r * RAND) * exp(k * |p - q|)
//
// where delta is delta_AB_intra inside one dimer and delta_AA, delta_BB or
// delta_AB_cross between dimers. Diagonal entries are eps * (1 + r * RAND).
//
// RAND is drawn once per unordered pair (min(i,j), max(i,j)) from a
// counter-based SplitMix64 stream, so the value does not depend on generation
// order and H is exactly symmetric:
//
//   key  = (uint64(min) << 32) | uint64(max)
//   u    = splitmix64(seed ^ splitmix64(key))
//   RAND = 2 * (u >> 11) * 2^-53 - 1
//
// splitmix64(x) adds 0x9e3779b97f4a7c15 to x and applies the standard
// finalizer (shift 30 / mul 0xbf58476d1ce4e5b9, shift 27 / mul
// 0x94d049bb133111eb, shift 31). Couplings with |delta| (1 + r) exp(k d)
// below kCouplingCutoff are never stored.

struct ModelParams {
  double eps_A = 0.0;
  double eps_B = 0.0;
  double delta_AA = 0.0;
  double delta_BB = 0.0;
  double delta_AB_intra = 0.0;
  double delta_AB_cross = 0.0;
  double k = 0.0;  ///< decay per dimer of separation, <= 0
  double r = 0.0;  ///< noise amplitude, >= 0
  std::uint64_t seed = 0;

  /// Throws InvalidArgument unless k <= 0, r >= 0 and every field is finite.
  void validate() const;
};

enum class SystemKind { metal, semiconductor, soft_matter };

/// "metal", "semiconductor", "soft_matter" (or "softmatter"). Throws ParseError.
SystemKind parse_system(std::string_view name);
std::string_view to_string(SystemKind kind) noexcept;

ModelParams preset(SystemKind kind);

inline constexpr double kCouplingCutoff = 1e-14;
/// Pruning threshold at which sparsity figures are reported.
inline constexpr double kDefaultSparsityThreshold = 1e-10;

std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// The RAND value in [-1, 1] attached to orbital pair (i, j) for a seed.
double pair_noise(std::uint64_t seed, std::size_t i, std::size_t j) noexcept;

/// Throws InvalidDimension for odd n and InvalidArgument for bad params.
DenseMatrix generate(std::size_t n, const ModelParams& p);

/// Same entries as generate(), keeping |h_ij| > threshold, built row by row
/// without a dense intermediate. m_max = 0 sizes the width to the widest row.
EllpackMatrix generate_ellpack(std::size_t n, const ModelParams& p, double threshold,
                               const ExecContext& ctx = {}, std::size_t m_max = 0);

/// Fraction of entries with |h_ij| <= threshold.
double sparsity(const DenseMatrix& h, double threshold);
double sparsity(const EllpackMatrix& h, double threshold);

struct DOSHistogram {
  std::vector<double> energies;  ///< bin centers, eV
  std::vector<double> density;   ///< states per eV
  double broadening = 0.0;
};

/// Gaussian-broadened density of states on `bins` equally spaced points
/// covering the spectrum plus 5 sigma on each side. Energies are reported
/// relative to `reference` (pass fermi_level() to put E_F at 0). The integral
/// matches n to within 1% once the spacing is well below the broadening.
DOSHistogram dos(const DenseMatrix& h, std::size_t bins, double broadening, double reference = 0.0);
DOSHistogram dos_from_eigenvalues(const std::vector<double>& eigenvalues, std::size_t bins,
                                  double broadening, double reference = 0.0);

/// Density at energy e (relative to the histogram's reference), linearly
/// interpolated between bin centers; 0 outside the grid.
double density_at(const DOSHistogram& d, double e) noexcept;

/// Midpoint between the highest occupied and lowest unoccupied eigenvalue.
double fermi_level(const DenseMatrix& h, std::size_t n_occ);
double fermi_level(const std::vector<double>& ascending_eigenvalues, std::size_t n_occ);

}  // namespace sp2bench
