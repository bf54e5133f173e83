#include "sp2bench/bench.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <limits>
#include <tuple>

#include "sp2bench/error.hpp"
#include "sp2bench/matrix_market.hpp"
#include "sp2bench/perf/timing.hpp"

namespace sp2bench::bench {

std::string_view to_string(System s) noexcept {
  switch (s) {
    case System::metal: return "metal";
    case System::semiconductor: return "semiconductor";
    case System::soft_matter: return "soft_matter";
    case System::synthetic: return "synthetic";
  }
  return "?";
}

System parse_bench_system(std::string_view name) {
  if (name == "synthetic") return System::synthetic;
  return to_bench_system(parse_system(name));
}

System to_bench_system(SystemKind k) noexcept {
  switch (k) {
    case SystemKind::metal: return System::metal;
    case SystemKind::semiconductor: return System::semiconductor;
    case SystemKind::soft_matter: return System::soft_matter;
  }
  return System::synthetic;
}

std::string_view to_string(MicroKernel k) noexcept {
  switch (k) {
    case MicroKernel::sr: return "sr";
    case MicroKernel::ft: return "ft";
    case MicroKernel::ma: return "ma";
  }
  return "?";
}

MicroKernel parse_micro_kernel(std::string_view name) {
  if (name == "sr") return MicroKernel::sr;
  if (name == "ft") return MicroKernel::ft;
  if (name == "ma") return MicroKernel::ma;
  throw ParseError("unknown micro kernel", std::string(name));
}

std::vector<std::size_t> default_thread_counts(std::size_t logical_cpus) {
  std::vector<std::size_t> out;
  const std::size_t top = std::max<std::size_t>(1, logical_cpus);
  for (std::size_t t = 1; t <= top; t *= 2) out.push_back(t);
  if (out.back() != top) out.push_back(top);
  return out;
}

std::vector<std::size_t> default_thread_counts() {
  return default_thread_counts(static_cast<std::size_t>(perf::detect_topology().logical_cpus()));
}

namespace {

constexpr Variant kVariants[2] = {Variant::baseline, Variant::tuned};

// The pools of one benchmark instance: an unpinned baseline pool and a pinned
// tuned pool with the same worker count.
struct PoolPair {
  std::unique_ptr<perf::WorkerPool> baseline;
  std::unique_ptr<perf::WorkerPool> tuned;

  perf::WorkerPool& operator[](Variant v) { return v == Variant::baseline ? *baseline : *tuned; }
};

PoolPair make_pools(std::size_t threads, const HarnessConfig& cfg, const perf::Topology& topo) {
  std::vector<perf::PinAssignment> map;
  if (cfg.subset)
    map = perf::resolve_pin_map({cfg.placement, *cfg.subset, true}, topo);
  else
    map = perf::pin_map_for_count(cfg.placement, topo, threads);
  PoolPair p;
  p.baseline = std::make_unique<perf::WorkerPool>(map.size());
  p.tuned = std::make_unique<perf::WorkerPool>(perf::cpus_of(map));
  return p;
}

std::vector<std::size_t> thread_grid(const HarnessConfig& cfg) {
  if (cfg.subset) return {static_cast<std::size_t>(cfg.subset->workers())};
  if (!cfg.thread_counts.empty()) return cfg.thread_counts;
  return default_thread_counts();
}

std::vector<Variant> variants_of(const HarnessConfig& cfg) {
  if (cfg.only) return {*cfg.only};
  return {Variant::baseline, Variant::tuned};
}

// Shuffled variant order for one instance, reproducible from the seed and
// the instance coordinates.
std::vector<Variant> order_for(const HarnessConfig& cfg, std::string_view experiment, std::size_t n,
                               std::size_t threads) {
  auto order = variants_of(cfg);
  std::uint64_t key = cfg.seed;
  for (char c : experiment) key = splitmix64(key ^ static_cast<unsigned char>(c));
  key = splitmix64(key ^ n);
  key = splitmix64(key ^ threads);
  std::mt19937_64 rng(key);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

struct Sample {
  double seconds = 0.0;
  double checksum = 0.0;
};

// Warm-up for every variant, then `reps` rounds that run each variant once in
// `order`. Returns the timed samples per variant.
std::vector<std::vector<Sample>> measure(const std::vector<Variant>& order, std::size_t reps,
                                         bool warmup, const std::function<Sample(Variant)>& run) {
  std::vector<std::vector<Sample>> samples(2);
  if (warmup)
    for (Variant v : order) run(v);
  for (std::size_t r = 0; r < reps; ++r)
    for (Variant v : order) samples[static_cast<std::size_t>(v)].push_back(run(v));
  return samples;
}

BenchResult summarize(std::string experiment, System system, std::size_t n, std::size_t threads,
                      Variant v, const std::vector<Sample>& s) {
  std::vector<double> secs;
  secs.reserve(s.size());
  for (const auto& x : s) secs.push_back(x.seconds);
  const perf::RunStats st = perf::summarize(secs);
  BenchResult r;
  r.experiment = std::move(experiment);
  r.system = system;
  r.n = n;
  r.threads = threads;
  r.variant = v;
  r.reps = s.size();
  r.min_s = st.min_s;
  r.median_s = st.median_s;
  r.stddev_s = st.stddev_s;
  r.checksum = s.empty() ? 0.0 : s.front().checksum;
  return r;
}

std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  if (std::isnan(a) || std::isnan(b) || std::signbit(a) != std::signbit(b))
    return std::numeric_limits<std::uint64_t>::max();
  const auto ia = std::bit_cast<std::uint64_t>(std::fabs(a));
  const auto ib = std::bit_cast<std::uint64_t>(std::fabs(b));
  return ia > ib ? ia - ib : ib - ia;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Pushes both result rows and checks exact checksum agreement.
void record_pair(BenchRun& out, const std::string& exp, System sys, std::size_t n,
                 std::size_t threads, const std::vector<Variant>& order,
                 const std::vector<std::vector<Sample>>& samples) {
  for (Variant v : order)
    out.results.push_back(summarize(exp, sys, n, threads, v, samples[static_cast<std::size_t>(v)]));
  if (order.size() < 2) return;
  std::vector<double> sums;
  for (Variant v : kVariants)
    for (const auto& s : samples[static_cast<std::size_t>(v)]) sums.push_back(s.checksum);
  for (double c : sums)
    if (std::bit_cast<std::uint64_t>(c) != std::bit_cast<std::uint64_t>(sums.front())) {
      out.mismatches.push_back({exp, sys, n, threads, "checksum " + fmt(c) + " vs " + fmt(sums.front())});
      return;
    }
}

}  // namespace

BenchRun run_microbench(MicroKernel kernel, const std::vector<std::size_t>& sizes,
                        const HarnessConfig& cfg) {
  if (sizes.empty()) throw InvalidArgument("run_microbench: no sizes");
  const auto threads_list = thread_grid(cfg);
  if (threads_list.empty()) throw InvalidArgument("run_microbench: no thread counts");
  const perf::Topology topo = perf::detect_topology();
  const std::string exp = "micro_" + std::string(to_string(kernel));

  BenchRun out;
  for (std::size_t n : sizes) {
    for (std::size_t threads : threads_list) {
      PoolPair pools = make_pools(threads, cfg, topo);
      const std::size_t workers = pools.baseline->size();
      auto call = [&](Variant v, perf::KernelProbe* probe) {
        switch (kernel) {
          case MicroKernel::sr: return perf::kernel_sr(n, kSrScale, v, pools[v], probe);
          case MicroKernel::ft: return perf::kernel_ft(n, v, pools[v], probe);
          case MicroKernel::ma: return perf::kernel_ma(n, v, pools[v], probe);
        }
        return perf::KernelResult{};
      };
      const auto order = order_for(cfg, exp, n, workers);

      // sr checksums legitimately differ in the last bits; compare outputs.
      if (kernel == MicroKernel::sr && order.size() == 2) {
        perf::KernelProbe pb, pt;
        call(Variant::baseline, &pb);
        call(Variant::tuned, &pt);
        std::uint64_t worst = 0;
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, ulp_distance(pb.output[i], pt.output[i]));
        if (worst > kSrMaxUlps)
          out.mismatches.push_back({exp, System::synthetic, n, workers,
                                    "element differs by " + std::to_string(worst) + " ulp"});
      }

      const auto samples = measure(order, cfg.reps, cfg.warmup, [&](Variant v) {
        const auto r = call(v, nullptr);
        return Sample{r.elapsed_seconds, r.checksum};
      });
      if (kernel == MicroKernel::sr) {
        for (Variant v : order)
          out.results.push_back(summarize(exp, System::synthetic, n, workers, v,
                                          samples[static_cast<std::size_t>(v)]));
      } else {
        record_pair(out, exp, System::synthetic, n, workers, order, samples);
      }
    }
  }
  sort_results(out.results);
  return out;
}

BenchRun run_spmm_sweep(const std::vector<SystemKind>& systems, const std::vector<std::size_t>& sizes,
                        const HarnessConfig& cfg) {
  if (systems.empty() || sizes.empty()) throw InvalidArgument("run_spmm_sweep: nothing to run");
  const auto threads_list = thread_grid(cfg);
  const perf::Topology topo = perf::detect_topology();
  const std::string exp = "spmm";

  BenchRun out;
  for (SystemKind kind : systems) {
    ModelParams params = preset(kind);
    params.seed = cfg.seed;
    for (std::size_t n : sizes) {
      // Width of X^2, found once on the calling thread so both variants
      // allocate identically shaped matrices.
      const EllpackMatrix probe = generate_ellpack(n, params, cfg.threshold);
      const std::size_t width = product_width(probe, probe, cfg.threshold);
      for (std::size_t threads : threads_list) {
        PoolPair pools = make_pools(threads, cfg, topo);
        const std::size_t workers = pools.baseline->size();
        const ExecContext ctx[2] = {{pools.baseline.get(), perf::AllocPolicy::baseline()},
                                    {pools.tuned.get(), perf::AllocPolicy::tuned()}};
        std::vector<EllpackMatrix> h(2);
        for (Variant v : variants_of(cfg)) {
          const auto& c = ctx[static_cast<std::size_t>(v)];
          h[static_cast<std::size_t>(v)] = generate_ellpack(n, params, cfg.threshold, c, probe.m_max());
        }
        const auto order = order_for(cfg, exp + std::string(to_string(kind)), n, workers);
        const auto samples = measure(order, cfg.reps, cfg.warmup, [&](Variant v) {
          const auto i = static_cast<std::size_t>(v);
          perf::Stopwatch sw;
          const SquareResult sq = x_squared(h[i], cfg.threshold, ctx[i], width);
          const double t = sw.seconds();
          return Sample{t, checksum(sq.x2)};
        });
        record_pair(out, exp, to_bench_system(kind), n, workers, order, samples);
      }
    }
  }
  sort_results(out.results);
  return out;
}

SP2BenchRun run_sp2_bench(const std::vector<SystemKind>& systems, const std::vector<std::size_t>& sizes,
                          const SP2Config& sp2, const HarnessConfig& cfg) {
  if (systems.empty() || sizes.empty()) throw InvalidArgument("run_sp2_bench: nothing to run");
  for (SystemKind k : systems)
    if (k == SystemKind::metal)
      throw InvalidArgument("run_sp2_bench: SP2 needs a gapped system (semiconductor or soft_matter)");
  const auto threads_list = thread_grid(cfg);
  const perf::Topology topo = perf::detect_topology();
  const std::string exp = "sp2";
  std::filesystem::create_directories(cfg.work_dir);

  SP2BenchRun out;
  for (SystemKind kind : systems) {
    ModelParams params = preset(kind);
    params.seed = cfg.seed;
    for (std::size_t n : sizes) {
      const auto file = cfg.work_dir / ("sp2bench_" + std::string(to_string(kind)) + "_" +
                                        std::to_string(n) + "_" + std::to_string(cfg.seed) + ".mtx");
      mm::write(file, generate_ellpack(n, params, 0.0), mm::Symmetry::symmetric);
      SP2Config run = sp2;
      if (run.n_occ == 0) run.n_occ = n / 2;

      for (std::size_t threads : threads_list) {
        PoolPair pools = make_pools(threads, cfg, topo);
        const std::size_t workers = pools.baseline->size();
        const ExecContext ctx[2] = {{pools.baseline.get(), perf::AllocPolicy::baseline()},
                                    {pools.tuned.get(), perf::AllocPolicy::tuned()}};
        std::vector<std::vector<PhaseTimes>> phases(2);
        std::vector<SP2Report> last(2);
        std::vector<EllpackMatrix> density(2);
        std::size_t calls[2] = {0, 0};
        const auto order = order_for(cfg, exp + std::string(to_string(kind)), n, workers);
        const auto samples = measure(order, cfg.reps, cfg.warmup, [&](Variant v) {
          const auto i = static_cast<std::size_t>(v);
          SP2Result r = run_proxy(file, run, ctx[i]);
          const double sum = checksum(r.density);
          if (density[i].n() == 0) density[i] = std::move(r.density);
          if (cfg.warmup && calls[i]++ == 0) return Sample{0.0, sum};
          phases[i].push_back(r.report.phase_times);
          last[i] = std::move(r.report);
          return Sample{phases[i].back().total(), sum};
        });
        record_pair(out, exp, to_bench_system(kind), n, workers, order, samples);
        if (order.size() == 2 && !identical(density[0], density[1]))
          out.mismatches.push_back(
              {exp, to_bench_system(kind), n, workers, "density matrices differ between variants"});
        for (Variant v : order) {
          const auto i = static_cast<std::size_t>(v);
          PhaseRow row;
          row.system = to_bench_system(kind);
          row.n = n;
          row.threads = workers;
          row.variant = v;
          row.iterations = last[i].iterations;
          for (Phase p : kPhases) {
            std::vector<double> t;
            for (const auto& pt : phases[i]) t.push_back(pt[p]);
            row.phases[p] = t.empty() ? 0.0 : perf::summarize(t).median_s;
          }
          out.phases.push_back(row);
          out.reports.push_back(last[i]);
        }
      }
      std::error_code ec;
      std::filesystem::remove(file, ec);
    }
  }
  sort_results(out.results);
  std::vector<std::size_t> idx(out.phases.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = out.phases[a];
    const auto& y = out.phases[b];
    return std::tie(x.system, x.n, x.threads, x.variant) < std::tie(y.system, y.n, y.threads, y.variant);
  });
  std::vector<PhaseRow> phases;
  std::vector<SP2Report> reports;
  for (std::size_t i : idx) {
    phases.push_back(out.phases[i]);
    reports.push_back(std::move(out.reports[i]));
  }
  out.phases = std::move(phases);
  out.reports = std::move(reports);
  return out;
}

void sort_results(std::vector<BenchResult>& results) {
  std::stable_sort(results.begin(), results.end(), [](const BenchResult& a, const BenchResult& b) {
    return std::tie(a.experiment, a.system, a.n, a.threads, a.variant) <
           std::tie(b.experiment, b.system, b.n, b.threads, b.variant);
  });
}

void write_csv(std::ostream& out, std::vector<BenchResult> results) {
  sort_results(results);
  out << kCsvHeader << '\n';
  for (const auto& r : results)
    out << r.experiment << ',' << to_string(r.system) << ',' << r.n << ',' << r.threads << ','
        << perf::to_string(r.variant) << ',' << r.reps << ',' << fmt(r.min_s) << ',' << fmt(r.median_s)
        << ',' << fmt(r.stddev_s) << ',' << fmt(r.checksum) << '\n';
  if (!out) throw IoError("CSV write failed");
}

void emit_csv(const std::vector<BenchResult>& results, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  write_csv(out, results);
}

namespace {

template <class T>
T field(std::string_view tok, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw ParseError(what, std::string(tok));
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::vector<BenchResult> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing CSV header", "");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("unexpected CSV header", line);
  std::vector<BenchResult> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != 10) throw ParseError("expected 10 CSV fields", line);
    BenchResult r;
    r.experiment = std::string(f[0]);
    r.system = parse_bench_system(f[1]);
    r.n = field<std::size_t>(f[2], "bad n");
    r.threads = field<std::size_t>(f[3], "bad thread count");
    r.variant = perf::parse_variant(f[4]);
    r.reps = field<std::size_t>(f[5], "bad reps");
    r.min_s = field<double>(f[6], "bad min_s");
    r.median_s = field<double>(f[7], "bad median_s");
    r.stddev_s = field<double>(f[8], "bad stddev_s");
    r.checksum = field<double>(f[9], "bad checksum");
    out.push_back(std::move(r));
  }
  return out;
}

void write_phase_csv(std::ostream& out, const std::vector<PhaseRow>& rows) {
  out << kPhaseCsvHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.system) << ',' << r.n << ',' << r.threads << ',' << perf::to_string(r.variant)
        << ',' << r.iterations;
    for (Phase p : kPhases) out << ',' << fmt(r.phases[p]);
    out << '\n';
  }
  if (!out) throw IoError("CSV write failed");
}

void emit_phase_csv(const std::vector<PhaseRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  write_phase_csv(out, rows);
}

}  // namespace sp2bench::bench
