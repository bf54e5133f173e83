#include "sp2bench/perf/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "sp2bench/error.hpp"
#include "sp2bench/perf/aligned_buffer.hpp"
#include "sp2bench/perf/timing.hpp"

namespace sp2bench::perf {

namespace {

constexpr std::size_t kLineDoubles = kCacheLine / sizeof(double);
constexpr std::size_t kLineCounters = kCacheLine / sizeof(std::int64_t);

void finish(KernelResult& r, const AlignedBuffer<double>& out, KernelProbe* probe) {
  double sum = 0.0;
  double abs_sum = 0.0;
  for (double x : out) {
    sum += x;
    abs_sum += std::fabs(x);
  }
  r.checksum = sum;
  r.abs_sum = abs_sum;
  // Clock granularity can yield zero for tiny n.
  r.elapsed_seconds = std::max(r.elapsed_seconds, 1e-9);
  if (probe) probe->output.assign(out.begin(), out.end());
}

void record_chunks(KernelProbe* probe, const AlignedBuffer<double>& out, WorkerPool& pool,
                   std::size_t grain) {
  if (!probe) return;
  probe->chunk_starts.assign(pool.size(), 0);
  for (std::size_t w = 0; w < pool.size(); ++w) {
    const Range r = static_partition(out.size(), pool.size(), w, grain);
    probe->chunk_starts[w] = r.empty() ? 0 : address_of(out.data() + r.begin);
  }
}

void check_n(std::size_t n) {
  if (n == 0) throw InvalidArgument("kernel size must be positive");
}

}  // namespace

std::string_view to_string(Variant v) noexcept { return v == Variant::baseline ? "baseline" : "tuned"; }

Variant parse_variant(std::string_view name) {
  if (name == "baseline") return Variant::baseline;
  if (name == "tuned") return Variant::tuned;
  throw ParseError("unknown variant", std::string(name));
}

void divide_by(const double* in, double* out, std::size_t n, double scale, WorkerPool& pool) {
  pool.parallel_for(n, [=](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) out[i] = in[i] / scale;
  });
}

void multiply_by_reciprocal(const double* in, double* out, std::size_t n, double scale,
                            WorkerPool& pool) {
  const double r = 1.0 / scale;
  pool.parallel_for(n, [=](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) out[i] = in[i] * r;
  });
}

KernelResult kernel_sr(std::size_t n, double scale, Variant v, WorkerPool& pool,
                       KernelProbe* probe) {
  check_n(n);
  if (scale == 0.0 || !std::isfinite(scale)) throw InvalidScale("scale must be finite and nonzero");
  KernelResult r{.variant = v, .threads = pool.size()};

  Stopwatch setup;
  AlignedBuffer<double> in(n, kCacheLine);
  AlignedBuffer<double> out = allocate<double>(n, AllocPolicy::tuned(), pool, 1,
                                               probe ? &probe->touched : nullptr);
  double* src = in.data();
  pool.parallel_for(n, [=](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) src[i] = 1.0 + static_cast<double>(i % 4096) / 4096.0;
  });
  r.setup_seconds = setup.seconds();

  Stopwatch body;
  if (v == Variant::baseline)
    divide_by(in.data(), out.data(), n, scale, pool);
  else
    multiply_by_reciprocal(in.data(), out.data(), n, scale, pool);
  r.elapsed_seconds = body.seconds();

  if (probe) {
    probe->computed.assign(pool.size(), Range{});
    for (std::size_t w = 0; w < pool.size(); ++w) probe->computed[w] = static_partition(n, pool.size(), w);
  }
  record_chunks(probe, out, pool, 1);
  finish(r, out, probe);
  return r;
}

KernelResult kernel_ft(std::size_t n, Variant v, WorkerPool& pool, KernelProbe* probe) {
  check_n(n);
  KernelResult r{.variant = v, .threads = pool.size()};
  const InitMode mode = v == Variant::baseline ? InitMode::serial_fill : InitMode::parallel_first_touch;

  Stopwatch setup;
  std::vector<Range> touched;
  AlignedBuffer<double> a(n, kCacheLine), b(n, kCacheLine), c(n, kCacheLine);
  initialize(a, 0.0, mode, pool, 1, &touched);
  initialize(b, 1.0, mode, pool, 1);
  initialize(c, 2.0, mode, pool, 1);
  r.setup_seconds = setup.seconds();

  std::vector<Range> computed(probe ? pool.size() : 0);
  double* pa = a.data();
  const double* pb = b.data();
  const double* pc = c.data();
  Stopwatch body;
  pool.parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t w) {
    for (std::size_t i = lo; i < hi; ++i) pa[i] = pb[i] + 3.0 * pc[i];
    if (probe) computed[w] = {lo, hi};
  });
  r.elapsed_seconds = body.seconds();

  if (probe) {
    probe->touched = std::move(touched);
    probe->computed = std::move(computed);
  }
  record_chunks(probe, a, pool, 1);
  finish(r, a, probe);
  return r;
}

std::size_t ma_grain(Variant v) noexcept { return v == Variant::baseline ? 1 : kLineDoubles; }
std::size_t ma_alignment(Variant v) noexcept { return v == Variant::baseline ? 1 : kCacheLine; }

KernelResult kernel_ma(std::size_t n, Variant v, WorkerPool& pool, KernelProbe* probe) {
  check_n(n);
  KernelResult r{.variant = v, .threads = pool.size()};
  const std::size_t grain = ma_grain(v);
  const std::size_t align = ma_alignment(v);
  const std::size_t stride = v == Variant::baseline ? 1 : kLineCounters;

  Stopwatch setup;
  std::vector<Range> touched;
  AlignedBuffer<double> x(n, align), out(n, align);
  AlignedBuffer<std::int64_t> counters(pool.size() * stride, align);
  std::fill(counters.begin(), counters.end(), std::int64_t{0});
  initialize(out, 0.0, InitMode::parallel_first_touch, pool, grain, &touched);
  double* px = x.data();
  pool.parallel_for(
      n,
      [=](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t i = lo; i < hi; ++i) px[i] = static_cast<double>(i % 1000) * 0.25;
      },
      grain);
  r.setup_seconds = setup.seconds();

  std::vector<Range> computed(probe ? pool.size() : 0);
  double* po = out.data();
  std::int64_t* pcount = counters.data();
  Stopwatch body;
  pool.parallel_for(
      n,
      [&](std::size_t lo, std::size_t hi, std::size_t w) {
        // Atomic load/store keeps one real store per element so that packed
        // counters really contend for their shared line.
        std::atomic_ref<std::int64_t> count(pcount[w * stride]);
        for (std::size_t i = lo; i < hi; ++i) {
          po[i] = px[i] * 0.5 + 1.0;
          count.store(count.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed);
        }
        if (probe) computed[w] = {lo, hi};
      },
      grain);
  r.elapsed_seconds = body.seconds();

  std::int64_t total = 0;
  for (std::size_t w = 0; w < pool.size(); ++w) total += counters[w * stride];
  if (total != static_cast<std::int64_t>(n)) throw Error("memory-alignment kernel lost updates");

  if (probe) {
    probe->touched = std::move(touched);
    probe->computed = std::move(computed);
  }
  record_chunks(probe, out, pool, grain);
  finish(r, out, probe);
  return r;
}

}  // namespace sp2bench::perf
