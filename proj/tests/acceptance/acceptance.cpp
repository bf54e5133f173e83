// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unistd.h>
#include <vector>

#include "sp2bench/bench.hpp"
#include "sp2bench/dense_oracle.hpp"
#include "sp2bench/ellpack.hpp"
#include "sp2bench/hamiltonian.hpp"
#include "sp2bench/perf/affinity.hpp"
#include "sp2bench/perf/aligned_buffer.hpp"
#include "sp2bench/perf/kernels.hpp"
#include "sp2bench/perf/timing.hpp"
#include "sp2bench/sp2.hpp"

namespace fs = std::filesystem;
using namespace sp2bench;

namespace {

struct Outcome {
  enum Status { pass, fail, not_applicable } status = pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const Outcome& o) {
  const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::fail ? "FAIL" : "N/A ";
  std::printf("%s  %d  %-28s %s\n", tag, id, title, o.detail.c_str());
  std::fflush(stdout);
  if (o.status == Outcome::fail) ++failures;
}

Outcome run_guarded(const std::function<Outcome()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {Outcome::fail, std::string("exception: ") + e.what()};
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

DenseMatrix random_symmetric(std::size_t n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = val(rng);
    for (std::size_t j = 0; j < i; ++j)
      if (coin(rng) < density) m(i, j) = m(j, i) = val(rng);
  }
  return m;
}

EllpackMatrix ell(const DenseMatrix& d) {
  return from_dense(d, 0.0, std::max<std::size_t>(1, max_row_count(d, 0.0)));
}

double rel(double got, double want) {
  return want == 0.0 ? std::fabs(got) : std::fabs(got - want) / std::fabs(want);
}

// 1 -------------------------------------------------------------------------

Outcome oracle_equivalence() {
  constexpr double kTol = 1e-12;
  perf::Stopwatch sw;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> order(1, 256);
  std::uniform_real_distribution<double> fill(0.005, 0.2);
  double worst = 0.0;
  int cases = 0;
  for (; cases < 200; ++cases) {
    const std::size_t n = order(rng);
    const DenseMatrix a = random_symmetric(n, fill(rng), rng);
    const DenseMatrix b = random_symmetric(n, fill(rng), rng);
    const auto ea = ell(a), eb = ell(b);

    const DenseMatrix ab = oracle::dense_multiply(a, b);
    worst = std::max(worst, relative_frobenius_error(to_dense(multiply(ea, eb, 0.0, {}, n)), ab));

    DenseMatrix sum(n);
    double diff2 = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
      sum.values()[k] = 0.75 * a.values()[k] - 1.5 * b.values()[k];
      const double d = a.values()[k] - b.values()[k];
      diff2 += d * d;
    }
    worst = std::max(worst, relative_frobenius_error(to_dense(add_scaled(0.75, ea, -1.5, eb, 0.0, {}, n)), sum));
    worst = std::max(worst, rel(trace(ea), a.trace()));
    worst = std::max(worst, rel(fnorm_diff(ea, eb), std::sqrt(diff2)));
    const auto sq = x_squared(ea, 0.0, {}, n);
    worst = std::max(worst, rel(sq.trace_x2, oracle::dense_multiply(a, a).trace()));
  }
  const double secs = sw.seconds();
  const bool ok = worst <= kTol && secs < 60.0;
  return {ok ? Outcome::pass : Outcome::fail,
          std::to_string(cases) + " matrices, worst relative error " + fmt("%.2e", worst) + " (tol 1e-12), " +
              fmt("%.1f", secs) + " s (limit 60 s)"};
}

// 2 -------------------------------------------------------------------------

Outcome sp2_correctness() {
  perf::Stopwatch sw;
  double worst_rel = 0, worst_trace = 0, worst_idem = 0;
  std::size_t worst_iter = 0;
  bool all_converged = true;
  for (SystemKind kind : {SystemKind::semiconductor, SystemKind::soft_matter})
    for (std::size_t n : {128u, 512u}) {
      const ModelParams p = preset(kind);
      const DenseMatrix h = generate(n, p);
      SP2Config cfg;
      cfg.n_occ = n / 2;
      cfg.threshold = 0.0;
      const auto r = sp2_basic(ell(h), cfg);
      all_converged = all_converged && r.report.converged;
      const DenseMatrix d = to_dense(r.density);
      const DenseMatrix ref = oracle::exact_density_matrix(h, n / 2);
      worst_rel = std::max(worst_rel, relative_frobenius_error(d, ref));
      worst_trace = std::max(worst_trace, std::fabs(d.trace() - static_cast<double>(n / 2)));
      worst_idem = std::max(worst_idem, frobenius_distance(oracle::dense_multiply(d, d), d));
      worst_iter = std::max(worst_iter, r.report.iterations);
    }
  const double secs = sw.seconds();
  const bool ok = all_converged && worst_rel <= 1e-5 && worst_trace <= 1e-4 && worst_idem <= 1e-6 &&
                  worst_iter <= 100 && secs < 120.0;
  return {ok ? Outcome::pass : Outcome::fail,
          "rel err " + fmt("%.1e", worst_rel) + " (<=1e-5), |tr-nocc| " + fmt("%.1e", worst_trace) +
              " (<=1e-4), ||D^2-D|| " + fmt("%.1e", worst_idem) + " (<=1e-6), iterations " +
              std::to_string(worst_iter) + " (<=100), " + fmt("%.1f", secs) + " s (limit 120 s)"};
}

// 3 -------------------------------------------------------------------------

Outcome sparsity_figures() {
  const double t = kDefaultSparsityThreshold;
  auto at = [&](SystemKind k) { return sparsity(generate_ellpack(1024, preset(k), t), t); };
  const double metal = at(SystemKind::metal);
  const double semi = at(SystemKind::semiconductor);
  const double soft = at(SystemKind::soft_matter);
  const bool semi_ok = std::fabs(semi - 0.94) <= 0.05;
  const bool soft_ok = std::fabs(soft - 0.82) <= 0.05;
  const bool order_ok = metal < soft && soft < semi;
  return {semi_ok && soft_ok && order_ok ? Outcome::pass : Outcome::fail,
          "threshold " + fmt("%.0e", t) + ": semiconductor " + fmt("%.3f", semi) + " (want 0.94+-0.05), soft matter " +
              fmt("%.3f", soft) + " (want 0.82+-0.05), metal " + fmt("%.3f", metal) +
              (order_ok ? ", ordering holds" : ", ordering metal < soft < semiconductor violated")};
}

// 4 -------------------------------------------------------------------------

std::vector<std::size_t> one_two_max() {
  const auto cpus = static_cast<std::size_t>(perf::detect_topology().logical_cpus());
  std::set<std::size_t> s{1, 2, cpus};
  return {s.begin(), s.end()};
}

void append(bench::BenchRun& all, const bench::BenchRun& r) {
  all.results.insert(all.results.end(), r.results.begin(), r.results.end());
  all.mismatches.insert(all.mismatches.end(), r.mismatches.begin(), r.mismatches.end());
}

Outcome optimization_neutrality() {
  bench::HarnessConfig cfg;
  cfg.thread_counts = one_two_max();
  cfg.reps = 2;
  bench::BenchRun all;
  const std::vector<std::size_t> sizes{1, 1000, 65537, std::size_t{1} << 22};
  for (auto k : {bench::MicroKernel::sr, bench::MicroKernel::ft, bench::MicroKernel::ma})
    append(all, bench::run_microbench(k, sizes, cfg));
  append(all, bench::run_spmm_sweep({SystemKind::metal, SystemKind::semiconductor, SystemKind::soft_matter},
                                    {1000}, cfg));
  SP2Config sp2;
  sp2.threshold = 1e-8;
  sp2.idempotency_tol = 1e-6;
  append(all, bench::run_sp2_bench({SystemKind::semiconductor, SystemKind::soft_matter}, {256}, sp2, cfg));
  std::string threads;
  for (auto t : cfg.thread_counts) threads += (threads.empty() ? "" : ",") + std::to_string(t);
  if (!all.mismatches.empty()) {
    const auto& m = all.mismatches.front();
    return {Outcome::fail, std::to_string(all.mismatches.size()) + " mismatching pairs, first " + m.experiment +
                               " n=" + std::to_string(m.n) + " threads=" + std::to_string(m.threads) + ": " +
                               m.detail};
  }
  return {Outcome::pass, std::to_string(all.results.size() / 2) +
                             " baseline/tuned pairs agree (exact; sr within 4 ulp) at threads " + threads};
}

// 5 -------------------------------------------------------------------------

std::vector<perf::CpuSlot> enumerate_placement(perf::Placement placement, const perf::HwSubset& s,
                                               const perf::Topology& topo) {
  std::vector<std::vector<perf::CpuSlot>> per_socket(static_cast<std::size_t>(s.sockets));
  for (const auto& slot : topo.slots)
    if (slot.socket < s.sockets && slot.core < s.cores_per_socket && slot.thread < s.threads_per_core)
      per_socket[static_cast<std::size_t>(slot.socket)].push_back(slot);
  for (auto& v : per_socket)
    std::sort(v.begin(), v.end(), [](const perf::CpuSlot& a, const perf::CpuSlot& b) {
      return std::tie(a.thread, a.core) < std::tie(b.thread, b.core);
    });
  std::vector<perf::CpuSlot> out;
  if (placement == perf::Placement::compact) {
    for (const auto& v : per_socket) out.insert(out.end(), v.begin(), v.end());
  } else {
    for (std::size_t k = 0; k < per_socket.front().size(); ++k)
      for (const auto& v : per_socket) out.push_back(v[k]);
  }
  return out;
}

Outcome affinity_semantics() {
  const int a = perf::parse_subset("1t,2s,24c").workers();
  const int b = perf::parse_subset("2s,2t,24c").workers();
  std::size_t maps = 0, bad = 0;
  for (auto [s, c] : {std::pair{2, 2}, std::pair{2, 24}})
    for (int t : {1, 2}) {
      const auto topo = perf::Topology::synthetic(s, c, t);
      for (auto p : {perf::Placement::compact, perf::Placement::scatter})
        for (int ss = 1; ss <= s; ++ss)
          for (int tt = 1; tt <= t; ++tt)
            for (int cc = 1; cc <= c; ++cc) {
              const perf::HwSubset sub{ss, tt, cc};
              const auto map = perf::resolve_pin_map({p, sub, true}, topo);
              const auto want = enumerate_placement(p, sub, topo);
              ++maps;
              bool same = map.size() == want.size();
              for (std::size_t i = 0; same && i < map.size(); ++i)
                same = map[i].worker == i && map[i].slot == want[i];
              bad += !same;
            }
    }
  const bool ok = a == 48 && b == 96 && bad == 0;
  return {ok ? Outcome::pass : Outcome::fail,
          "\"1t,2s,24c\" -> " + std::to_string(a) + ", \"2s,2t,24c\" -> " + std::to_string(b) + "; " +
              std::to_string(maps - bad) + "/" + std::to_string(maps) +
              " compact/scatter pin maps on 2x2 and 2x24 match enumeration"};
}

// 6 -------------------------------------------------------------------------

struct SubResult {
  Outcome::Status status;
  std::string text;
};

SubResult no_regression() {
  bench::HarnessConfig cfg;
  cfg.reps = 10;
  bench::BenchRun all;
  for (auto k : {bench::MicroKernel::sr, bench::MicroKernel::ft, bench::MicroKernel::ma})
    append(all, bench::run_microbench(k, {std::size_t{1} << 22}, cfg));
  append(all, bench::run_spmm_sweep({SystemKind::metal, SystemKind::semiconductor, SystemKind::soft_matter},
                                    {1000, 2000}, cfg));
  SP2Config sp2;
  sp2.threshold = 1e-8;
  sp2.idempotency_tol = 1e-6;
  append(all, bench::run_sp2_bench({SystemKind::semiconductor, SystemKind::soft_matter}, {512}, sp2, cfg));

  double worst = 0.0;
  std::string worst_at;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i + 1 < all.results.size(); ++i) {
    const auto& x = all.results[i];
    const auto& y = all.results[i + 1];
    if (x.variant != bench::Variant::baseline || y.variant != bench::Variant::tuned ||
        std::tie(x.experiment, x.system, x.n, x.threads) != std::tie(y.experiment, y.system, y.n, y.threads))
      continue;
    ++pairs;
    const double ratio = y.median_s / x.median_s;
    if (ratio > worst) {
      worst = ratio;
      worst_at = x.experiment + "/" + std::string(bench::to_string(x.system)) + "/n=" + std::to_string(x.n) +
                 "/t=" + std::to_string(x.threads);
    }
  }
  const bool ok = pairs > 0 && worst <= 1.1 && all.mismatches.empty();
  return {ok ? Outcome::pass : Outcome::fail,
          "(a) worst tuned/baseline median " + fmt("%.3f", worst) + " at " + worst_at + " over " +
              std::to_string(pairs) + " pairs (<=1.1)"};
}

SubResult multi_socket() {
  const auto topo = perf::detect_topology();
  if (topo.sockets < 2) return {Outcome::not_applicable, "(b) n/a: single socket"};
  bench::HarnessConfig cfg;
  cfg.reps = 10;
  cfg.thread_counts = {static_cast<std::size_t>(topo.logical_cpus())};
  std::string text = "(b)";
  bool ok = true;
  for (auto k : {bench::MicroKernel::ft, bench::MicroKernel::ma}) {
    const auto run = bench::run_microbench(k, {std::size_t{1} << 24}, cfg);
    const double base = run.results.at(0).median_s, tuned = run.results.at(1).median_s;
    ok = ok && tuned < base;
    text += " " + std::string(bench::to_string(k)) + " speedup " + fmt("%.2f", base / tuned);
  }
  return {ok ? Outcome::pass : Outcome::fail, text};
}

SubResult partition_identity() {
  std::size_t cases = 0, bad = 0;
  for (std::size_t workers = 1; workers <= 8; ++workers) {
    perf::WorkerPool pool(workers);
    for (std::size_t n : {1u, 7u, 8u, 63u, 64u, 1000u, 4097u, 100003u})
      for (std::size_t grain : {1u, 8u}) {
        std::vector<perf::Range> touched;
        const perf::AllocPolicy policy{perf::kCacheLine, perf::InitMode::parallel_first_touch, 0.0};
        (void)perf::allocate<double>(n, policy, pool, grain, &touched);
        for (std::size_t w = 0; w < workers; ++w) {
          const auto want = perf::static_partition(n, workers, w, grain);
          bad += want.empty() ? !touched[w].empty() : touched[w] != want;
        }
        ++cases;
      }
    for (std::size_t n : {5u, 4096u, 100003u}) {
      for (auto kernel : {perf::kernel_ft, perf::kernel_ma}) {
        perf::KernelProbe probe;
        (void)kernel(n, perf::Variant::tuned, pool, &probe);
        for (std::size_t w = 0; w < workers; ++w) bad += probe.touched[w] != probe.computed[w];
        ++cases;
      }
    }
  }
  return {bad == 0 ? Outcome::pass : Outcome::fail,
          "(c) first-touch == compute partition in " + std::to_string(cases - std::min(cases, bad)) + "/" +
              std::to_string(cases) + " cases"};
}

Outcome speedup_substitute() {
  const SubResult a = no_regression();
  const SubResult b = multi_socket();
  const SubResult c = partition_identity();
  const bool ok = a.status == Outcome::pass && c.status == Outcome::pass && b.status != Outcome::fail;
  return {ok ? Outcome::pass : Outcome::fail, a.text + "; " + b.text + "; " + c.text};
}

// 7 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Drops min_s, median_s and stddev_s.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (i < 6 || i > 8) out += f[i] + ",";
    out += "\n";
  }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SP2BENCH_CLI + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("sp2bench_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::string why;
  if (run_cli("gen --system semiconductor --size 256 --seed 7 --out " + p("h.mtx")) != 0) why = "gen failed";
  for (int k = 0; why.empty() && k < 2; ++k) {
    const std::string s = std::to_string(k);
    if (run_cli("sp2 --in " + p("h.mtx") + " --threshold 1e-8 --tol 1e-6 --reps 2 --seed 7 --density-out " +
                p("d" + s + ".mtx") + " --out " + p("f" + s + ".csv")) != 0 ||
        run_cli("sp2 --system semiconductor,soft_matter --sizes 128 --reps 2 --seed 7 --out " +
                p("g" + s + ".csv")) != 0)
      why = "sp2 run failed";
  }
  if (why.empty()) {
    const std::string d0 = slurp(p("d0.mtx")), d1 = slurp(p("d1.mtx"));
    if (d0.empty() || d0 != d1) why = "density files differ";
    else if (without_timing(slurp(p("f0.csv"))) != without_timing(slurp(p("f1.csv"))) ||
             without_timing(slurp(p("g0.csv"))) != without_timing(slurp(p("g1.csv"))))
      why = "CSV differs outside timing columns";
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (!why.empty()) return {Outcome::fail, why};
  return {Outcome::pass, "two CLI sp2 runs: density files byte-identical, CSV identical modulo timing"};
}

// 8 -------------------------------------------------------------------------

Outcome gershgorin_containment() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> order(1, 128);
  std::uniform_real_distribution<double> fill(0.0, 0.5);
  int outside = 0;
  double tightest = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const DenseMatrix h = random_symmetric(order(rng), fill(rng), rng);
    const auto b = gershgorin_bounds(ell(h));
    const auto ev = oracle::eigh(h).values;
    // Eigenvalues carry rounding of order eps * ||H||.
    const double slack = 64 * 0x1p-52 * std::max(1.0, h.frobenius_norm());
    if (ev.front() < b.eps_min - slack || ev.back() > b.eps_max + slack) ++outside;
    tightest = std::min({tightest, ev.front() - b.eps_min, b.eps_max - ev.back()});
  }
  return {outside == 0 ? Outcome::pass : Outcome::fail,
          std::to_string(100 - outside) + "/100 spectra inside bounds (closest margin " + fmt("%.1e", tightest) + ")"};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", run_guarded(oracle_equivalence));
  report(2, "SP2 correctness", run_guarded(sp2_correctness));
  report(3, "sparsity figures", run_guarded(sparsity_figures));
  report(4, "optimization neutrality", run_guarded(optimization_neutrality));
  report(5, "affinity/subset semantics", run_guarded(affinity_semantics));
  report(6, "speedup substitute", run_guarded(speedup_substitute));
  report(7, "determinism", run_guarded(determinism));
  report(8, "Gershgorin containment", run_guarded(gershgorin_containment));
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
