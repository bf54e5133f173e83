#include "sp2bench/sp2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "sp2bench/matrix_market.hpp"
#include "sp2bench/perf/timing.hpp"

namespace sp2bench {

void SP2Config::validate(std::size_t n) const {
  if (n_occ == 0 || n_occ >= n)
    throw InvalidArgument("n_occ must satisfy 0 < n_occ < n (n_occ=" + std::to_string(n_occ) +
                          ", n=" + std::to_string(n) + ")");
  if (!(threshold >= 0)) throw InvalidArgument("threshold must be >= 0");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(idempotency_tol > 0)) throw InvalidArgument("idempotency_tol must be > 0");
}

std::string_view to_string(Branch b) noexcept {
  return b == Branch::square ? "square" : "expand";
}

std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::read_hamiltonian: return "read_hamiltonian";
    case Phase::init_misc: return "init_misc";
    case Phase::sp2_loop_x2: return "sp2_loop_x2";
    case Phase::sp2_loop_norm: return "sp2_loop_norm";
    case Phase::sp2_loop_misc: return "sp2_loop_misc";
  }
  return "?";
}

double PhaseTimes::total() const noexcept {
  double s = 0.0;
  for (double t : seconds) s += t;
  return s;
}

double PhaseTimes::loop() const noexcept {
  return (*this)[Phase::sp2_loop_x2] + (*this)[Phase::sp2_loop_norm] + (*this)[Phase::sp2_loop_misc];
}

SpectralBounds gershgorin_bounds(const EllpackMatrix& h) {
  if (h.n() == 0) return {};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < h.n(); ++i) {
    const auto cols = h.row_cols(i);
    const auto vals = h.row_values(i);
    double diag = 0.0;
    double radius = 0.0;
    for (std::size_t s = 0; s < cols.size(); ++s) {
      if (static_cast<std::size_t>(cols[s]) == i)
        diag = vals[s];
      else
        radius += std::fabs(vals[s]);
    }
    lo = std::min(lo, diag - radius);
    hi = std::max(hi, diag + radius);
  }
  return {lo, hi};
}

EllpackMatrix sp2_init(const EllpackMatrix& h, SpectralBounds b, const ExecContext& ctx,
                       std::size_t m_max) {
  if (!(b.eps_max > b.eps_min))
    throw DegenerateBounds("spectral bounds must satisfy eps_max > eps_min (got [" +
                           std::to_string(b.eps_min) + ", " + std::to_string(b.eps_max) + "])");
  const std::size_t width = m_max == 0 ? h.n() : m_max;
  const double inv = 1.0 / (b.eps_max - b.eps_min);
  const EllpackMatrix id = identity(h.n(), 1, ctx);
  return add_scaled(-inv, h, b.eps_max * inv, id, 0.0, ctx, width);
}

SP2Result sp2_basic(const EllpackMatrix& h, const SP2Config& cfg, const ExecContext& ctx) {
  cfg.validate(h.n());
  const std::size_t width = cfg.m_max == 0 ? h.n() : cfg.m_max;
  const auto n_occ = static_cast<double>(cfg.n_occ);

  SP2Result out;
  SP2Report& rep = out.report;
  perf::Stopwatch sw;
  rep.bounds = cfg.bounds ? *cfg.bounds : gershgorin_bounds(h);
  EllpackMatrix x = sp2_init(h, rep.bounds, ctx, width);
  rep.phase_times[Phase::init_misc] += sw.seconds();

  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (;;) {
    sw.reset();
    SquareResult sq = x_squared(x, cfg.threshold, ctx, width);
    rep.phase_times[Phase::sp2_loop_x2] += sw.seconds();

    sw.reset();
    const double err = fnorm_diff(sq.x2, x, ctx);
    rep.phase_times[Phase::sp2_loop_norm] += sw.seconds();

    sw.reset();
    if (err <= cfg.idempotency_tol) {
      rep.converged = true;
      rep.idempotency_error = err;
      rep.trace = sq.trace_x;
      out.density = std::move(x);
      rep.phase_times[Phase::sp2_loop_misc] += sw.seconds();
      return out;
    }
    if (!std::isfinite(err)) {
      rep.idempotency_error = err;
      rep.trace = sq.trace_x;
      throw NoConvergence("idempotency error is not finite; the iteration diverged", rep);
    }
    if (err < 0.99 * best) {
      best = err;
      stale = 0;
    } else if (++stale >= cfg.stagnation_window) {
      rep.idempotency_error = err;
      rep.trace = sq.trace_x;
      throw NoConvergence("idempotency error stalled at " + std::to_string(best) + " for " +
                              std::to_string(stale) +
                              " steps; the spectrum is likely degenerate at n_occ",
                          rep);
    }
    if (rep.iterations == cfg.max_iterations) {
      rep.idempotency_error = err;
      rep.trace = sq.trace_x;
      throw NoConvergence("no convergence within " + std::to_string(cfg.max_iterations) +
                              " iterations (error " + std::to_string(err) + ")",
                          rep);
    }
    const Branch branch = sq.trace_x > n_occ ? Branch::square : Branch::expand;
    if (branch == Branch::square)
      x = std::move(sq.x2);
    else
      x = add_scaled(2.0, x, -1.0, sq.x2, cfg.threshold, ctx, width);
    rep.per_iteration.push_back({sq.trace_x, branch, err});
    ++rep.iterations;
    rep.phase_times[Phase::sp2_loop_misc] += sw.seconds();
  }
}

SP2Result run_proxy(const std::filesystem::path& file, const SP2Config& cfg,
                    const perf::AffinityPolicy& affinity, const perf::AllocPolicy& alloc) {
  perf::Stopwatch sw;
  std::unique_ptr<perf::WorkerPool> pool;
  if (affinity.migration_locked) {
    const auto map = perf::resolve_pin_map(affinity, perf::detect_topology());
    pool = std::make_unique<perf::WorkerPool>(perf::cpus_of(map));
  } else {
    pool = std::make_unique<perf::WorkerPool>(static_cast<std::size_t>(affinity.subset.workers()));
  }
  const double pool_setup = sw.seconds();
  SP2Result res = run_proxy(file, cfg, ExecContext{pool.get(), alloc});
  res.report.phase_times[Phase::init_misc] += pool_setup;
  return res;
}

SP2Result run_proxy(const std::filesystem::path& file, const SP2Config& cfg, const ExecContext& ctx) {
  perf::Stopwatch sw;
  const EllpackMatrix h = mm::read_ellpack(file, 0.0, 0, ctx);
  const double read = sw.seconds();

  SP2Config run = cfg;
  if (run.n_occ == 0) run.n_occ = h.n() / 2;
  SP2Result res = sp2_basic(h, run, ctx);
  res.report.phase_times[Phase::read_hamiltonian] += read;
  return res;
}

}  // namespace sp2bench
