#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sp2bench/perf/partition.hpp"
#include "sp2bench/perf/worker_pool.hpp"

namespace sp2bench::perf {

enum class Variant { baseline, tuned };

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view name);

struct KernelResult {
  /// Sum of the output array in index order.
  double checksum = 0.0;
  /// Sum of |output|; bounds the checksum drift allowed by per-element ulp error.
  double abs_sum = 0.0;
  /// Kernel body only.
  double elapsed_seconds = 0.0;
  /// Allocation and initialization.
  double setup_seconds = 0.0;
  Variant variant = Variant::baseline;
  std::size_t threads = 1;
};

/// Optional instrumentation filled in by the kernels.
struct KernelProbe {
  std::vector<Range> touched;             ///< first-touch range of the output array, per worker
  std::vector<Range> computed;            ///< compute range, per worker
  std::vector<std::uintptr_t> chunk_starts;  ///< address of each worker's first output element
  std::vector<double> output;             ///< copy of the output array
};

/// Division inside the loop (baseline) versus multiplication by a hoisted
/// reciprocal (tuned). Throws InvalidScale for a zero scale.
KernelResult kernel_sr(std::size_t n, double scale, Variant v, WorkerPool& pool,
                       KernelProbe* probe = nullptr);

/// Streaming triad a = b + 3c over b = 1, c = 2 (so every a[i] is 7). The
/// baseline fills all arrays from the calling thread; the tuned variant has
/// each worker first-touch exactly the block it later updates.
KernelResult kernel_ft(std::size_t n, Variant v, WorkerPool& pool, KernelProbe* probe = nullptr);

/// Elementwise update with a per-worker progress counter stored every
/// element. The baseline uses unaligned arrays, element-granular blocks and
/// packed counters (workers share cache lines); the tuned variant uses 64-byte
/// aligned arrays, blocks in whole cache lines and one line per counter.
KernelResult kernel_ma(std::size_t n, Variant v, WorkerPool& pool, KernelProbe* probe = nullptr);

/// Block granularity (elements of double) and allocation alignment used by
/// kernel_ma for a variant.
std::size_t ma_grain(Variant v) noexcept;
std::size_t ma_alignment(Variant v) noexcept;

/// Elementwise bodies of kernel_sr, exposed for equivalence tests.
void divide_by(const double* in, double* out, std::size_t n, double scale, WorkerPool& pool);
void multiply_by_reciprocal(const double* in, double* out, std::size_t n, double scale,
                            WorkerPool& pool);

}  // namespace sp2bench::perf
