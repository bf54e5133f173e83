#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "sp2bench/ellpack.hpp"
#include "sp2bench/error.hpp"
#include "sp2bench/perf/affinity.hpp"

namespace sp2bench {

struct SpectralBounds {
  double eps_min = 0.0;
  double eps_max = 0.0;
};

struct SP2Config {
  std::size_t n_occ = 0;
  /// ELLPACK pruning applied after every x^2 and 2X - X^2.
  double threshold = 0.0;
  std::size_t max_iterations = 100;
  double idempotency_tol = 1e-8;
  /// Gershgorin bounds when unset.
  std::optional<SpectralBounds> bounds;
  /// Width of the iterates; 0 means n (never overflows).
  std::size_t m_max = 0;
  /// NoConvergence once the idempotency error has not improved by 1% on its
  /// best value for this many consecutive steps.
  std::size_t stagnation_window = 40;

  /// Throws InvalidArgument unless 0 < n_occ < n, threshold >= 0 and
  /// max_iterations >= 1.
  void validate(std::size_t n) const;
};

enum class Branch { square, expand };
std::string_view to_string(Branch b) noexcept;

struct IterationRecord {
  double trace_x = 0.0;            ///< tr(X) before the step
  Branch branch = Branch::square;  ///< update applied
  double idempotency_error = 0.0;  ///< ||X^2 - X||_F before the step
};

enum class Phase { read_hamiltonian, init_misc, sp2_loop_x2, sp2_loop_norm, sp2_loop_misc };
inline constexpr std::size_t kPhaseCount = 5;
inline constexpr std::array<Phase, kPhaseCount> kPhases{Phase::read_hamiltonian, Phase::init_misc,
                                                        Phase::sp2_loop_x2, Phase::sp2_loop_norm,
                                                        Phase::sp2_loop_misc};
std::string_view to_string(Phase p) noexcept;

struct PhaseTimes {
  std::array<double, kPhaseCount> seconds{};

  double& operator[](Phase p) noexcept { return seconds[static_cast<std::size_t>(p)]; }
  double operator[](Phase p) const noexcept { return seconds[static_cast<std::size_t>(p)]; }
  double total() const noexcept;
  /// x2 + norm + misc.
  double loop() const noexcept;
};

struct SP2Report {
  /// Purification steps applied; equals per_iteration.size().
  std::size_t iterations = 0;
  std::vector<IterationRecord> per_iteration;
  PhaseTimes phase_times;
  bool converged = false;
  /// ||D^2 - D||_F of the returned matrix.
  double idempotency_error = 0.0;
  double trace = 0.0;
  SpectralBounds bounds;
};

/// Raised when the iteration limit is hit or the idempotency error stagnates
/// (a degenerate level at the chemical potential).
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, SP2Report report)
      : Error(what), report_(std::move(report)) {}
  const SP2Report& report() const noexcept { return report_; }

 private:
  SP2Report report_;
};

/// Row-disc bounds: min/max over i of h_ii -/+ sum_{j != i} |h_ij|.
SpectralBounds gershgorin_bounds(const EllpackMatrix& h);

/// X0 = (eps_max I - H) / (eps_max - eps_min). Throws DegenerateBounds unless
/// eps_max > eps_min.
EllpackMatrix sp2_init(const EllpackMatrix& h, SpectralBounds bounds, const ExecContext& ctx = {},
                       std::size_t m_max = 0);

struct SP2Result {
  EllpackMatrix density;
  SP2Report report;
};

/// SP2-Basic: X <- X^2 when tr(X) > n_occ, else X <- 2X - X^2, until
/// ||X^2 - X||_F <= idempotency_tol. The zero Hamiltonian has equal Gershgorin
/// bounds and raises DegenerateBounds; with explicit bounds any fully
/// degenerate spectrum oscillates and raises NoConvergence.
SP2Result sp2_basic(const EllpackMatrix& h, const SP2Config& cfg, const ExecContext& ctx = {});

/// Read a Matrix Market Hamiltonian, build the pool described by `affinity`
/// (pinned when migration_locked), allocate with `alloc`, and run sp2_basic,
/// filling all five phase timers. cfg.n_occ = 0 means n / 2.
SP2Result run_proxy(const std::filesystem::path& hamiltonian_file, const SP2Config& cfg,
                    const perf::AffinityPolicy& affinity, const perf::AllocPolicy& alloc);
/// Same, on a pool the caller owns. Pool setup is then not timed.
SP2Result run_proxy(const std::filesystem::path& hamiltonian_file, const SP2Config& cfg,
                    const ExecContext& ctx);

}  // namespace sp2bench
