#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sp2bench/hamiltonian.hpp"
#include "sp2bench/perf/affinity.hpp"
#include "sp2bench/perf/kernels.hpp"
#include "sp2bench/sp2.hpp"

namespace sp2bench::bench {

using perf::Variant;

enum class System { metal, semiconductor, soft_matter, synthetic };
std::string_view to_string(System s) noexcept;
System parse_bench_system(std::string_view name);
System to_bench_system(SystemKind k) noexcept;

struct BenchResult {
  std::string experiment;
  System system = System::synthetic;
  std::size_t n = 0;
  std::size_t threads = 1;
  Variant variant = Variant::baseline;
  std::size_t reps = 0;
  double min_s = 0.0;
  double median_s = 0.0;
  double stddev_s = 0.0;
  double checksum = 0.0;

  friend bool operator==(const BenchResult&, const BenchResult&) = default;
};

/// A variant pair whose outputs disagree.
struct Mismatch {
  std::string experiment;
  System system = System::synthetic;
  std::size_t n = 0;
  std::size_t threads = 0;
  std::string detail;
};

struct BenchRun {
  std::vector<BenchResult> results;
  std::vector<Mismatch> mismatches;
};

struct HarnessConfig {
  /// Empty means default_thread_counts().
  std::vector<std::size_t> thread_counts;
  std::size_t reps = 5;
  std::uint64_t seed = 0;
  /// Placement of the tuned variant's pinned workers.
  perf::Placement placement = perf::Placement::scatter;
  /// When set, the tuned pool is pinned by this subset and its worker count
  /// replaces thread_counts.
  std::optional<perf::HwSubset> subset;
  /// Run only one variant (no mismatch check is possible then).
  std::optional<Variant> only;
  /// One untimed repetition per variant before the timed ones.
  bool warmup = true;
  /// ELLPACK pruning for spmm and sp2 experiments.
  double threshold = kDefaultSparsityThreshold;
  /// Scratch directory for Hamiltonian files read by the sp2 proxy.
  std::filesystem::path work_dir = std::filesystem::temp_directory_path();
};

/// Powers of two up to the logical CPU count, plus the count itself.
std::vector<std::size_t> default_thread_counts(std::size_t logical_cpus);
std::vector<std::size_t> default_thread_counts();

/// Desk-scale spmm sizes.
inline const std::vector<std::size_t> kDefaultSpmmSizes{1000, 2000, 4000, 8000};

enum class MicroKernel { sr, ft, ma };
std::string_view to_string(MicroKernel k) noexcept;
MicroKernel parse_micro_kernel(std::string_view name);

/// Scale divided out by the sr kernel.
inline constexpr double kSrScale = 3.0;
/// Largest per-element ulp distance accepted between sr variants.
inline constexpr std::uint64_t kSrMaxUlps = 4;

/// One row per (size, threads, variant); experiment name "micro_<kernel>".
/// sr outputs are compared element by element (kSrMaxUlps), ft and ma
/// checksums exactly.
BenchRun run_microbench(MicroKernel kernel, const std::vector<std::size_t>& sizes,
                        const HarnessConfig& cfg);

/// Times x_squared of the generated Hamiltonian. Baseline: serial
/// initialization, unaligned storage, unpinned pool. Tuned: first touch,
/// 64-byte alignment, pinned pool. Checksums must match exactly.
BenchRun run_spmm_sweep(const std::vector<SystemKind>& systems, const std::vector<std::size_t>& sizes,
                        const HarnessConfig& cfg);

struct PhaseRow {
  System system = System::synthetic;
  std::size_t n = 0;
  std::size_t threads = 1;
  Variant variant = Variant::baseline;
  std::size_t iterations = 0;
  /// Per-phase medians over the timed repetitions.
  PhaseTimes phases;
};

struct SP2BenchRun : BenchRun {
  /// Sorted by (system, n, threads, variant).
  std::vector<PhaseRow> phases;
  /// Report of the last timed repetition, parallel to `phases`.
  std::vector<SP2Report> reports;
};

/// Phase-timed proxy runs on gapped systems (semiconductor, soft matter) with
/// n_occ = n / 2. The Hamiltonian goes through a Matrix Market file so the
/// read phase is real. Densities must agree bitwise across variants.
SP2BenchRun run_sp2_bench(const std::vector<SystemKind>& systems, const std::vector<std::size_t>& sizes,
                          const SP2Config& sp2, const HarnessConfig& cfg);

inline constexpr std::string_view kCsvHeader =
    "experiment,system,n,threads,variant,reps,min_s,median_s,stddev_s,checksum";
inline constexpr std::string_view kPhaseCsvHeader =
    "system,n,threads,variant,iterations,read_hamiltonian,init_misc,sp2_loop_x2,sp2_loop_norm,"
    "sp2_loop_misc";

/// Sorted by (experiment, system, n, threads, variant).
void sort_results(std::vector<BenchResult>& results);
void write_csv(std::ostream& out, std::vector<BenchResult> results);
void emit_csv(const std::vector<BenchResult>& results, const std::filesystem::path& path);
/// Throws ParseError on a wrong header or malformed row.
std::vector<BenchResult> parse_csv(std::istream& in);

void write_phase_csv(std::ostream& out, const std::vector<PhaseRow>& rows);
void emit_phase_csv(const std::vector<PhaseRow>& rows, const std::filesystem::path& path);

}  // namespace sp2bench::bench
