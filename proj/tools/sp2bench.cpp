// sp2bench command-line driver: micro, spmm, sp2 and gen subcommands.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "sp2bench/bench.hpp"
#include "sp2bench/error.hpp"
#include "sp2bench/hamiltonian.hpp"
#include "sp2bench/matrix_market.hpp"
#include "sp2bench/perf/timing.hpp"
#include "sp2bench/sp2.hpp"

namespace {

using namespace sp2bench;
using bench::HarnessConfig;

constexpr int kExitMismatch = 2;

struct CommonFlags {
  std::string out = "-";
  std::size_t reps = 5;
  std::vector<std::size_t> threads;
  std::string hw_subset;
  std::string placement = "scatter";
  std::string variant = "both";
  std::uint64_t seed = 0;
  bool no_warmup = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--out", f.out, "CSV output path ('-' for stdout)");
  app->add_option("--reps", f.reps, "Timed repetitions per variant")->check(CLI::PositiveNumber);
  app->add_option("--threads", f.threads, "Thread counts (default: powers of two up to the CPU count)")
      ->delimiter(',');
  app->add_option("--hw-subset", f.hw_subset, "Pinned subset such as 2s,1t,24c");
  app->add_option("--placement", f.placement, "compact or scatter")
      ->check(CLI::IsMember({"compact", "scatter"}));
  app->add_option("--variant", f.variant, "baseline, tuned or both")
      ->check(CLI::IsMember({"baseline", "tuned", "both"}));
  app->add_option("--seed", f.seed, "Seed for generated inputs and variant order");
  app->add_flag("--no-warmup", f.no_warmup, "Skip the untimed warm-up repetition");
}

HarnessConfig harness(const CommonFlags& f) {
  HarnessConfig cfg;
  cfg.thread_counts = f.threads;
  cfg.reps = f.reps;
  cfg.seed = f.seed;
  cfg.placement = perf::parse_placement(f.placement);
  if (!f.hw_subset.empty()) cfg.subset = perf::parse_subset(f.hw_subset);
  if (f.variant != "both") cfg.only = perf::parse_variant(f.variant);
  cfg.warmup = !f.no_warmup;
  return cfg;
}

std::vector<SystemKind> systems_of(const std::vector<std::string>& names) {
  std::vector<SystemKind> out;
  for (const auto& s : names) out.push_back(parse_system(s));
  return out;
}

template <class Write>
void to_path_or_stdout(const std::string& path, Write&& write) {
  if (path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot create " + path);
  write(f);
}

int finish(const bench::BenchRun& run, const std::string& out) {
  to_path_or_stdout(out, [&](std::ostream& o) { bench::write_csv(o, run.results); });
  for (const auto& m : run.mismatches)
    std::cerr << "checksum mismatch: " << m.experiment << ' ' << bench::to_string(m.system)
              << " n=" << m.n << " threads=" << m.threads << ": " << m.detail << '\n';
  return run.mismatches.empty() ? 0 : kExitMismatch;
}

nlohmann::json report_json(const SP2Report& r) {
  nlohmann::json j;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["idempotency_error"] = r.idempotency_error;
  j["trace"] = r.trace;
  j["bounds"] = {r.bounds.eps_min, r.bounds.eps_max};
  nlohmann::json phases = nlohmann::json::object();
  for (Phase p : kPhases) phases[std::string(to_string(p))] = r.phase_times[p];
  j["phase_times"] = phases;
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : r.per_iteration)
    iters.push_back({{"trace_x", it.trace_x},
                     {"branch", std::string(to_string(it.branch))},
                     {"idempotency_error", it.idempotency_error}});
  j["per_iteration"] = iters;
  return j;
}

struct Sp2Flags {
  std::string in;
  std::size_t n_occ = 0;
  double threshold = 0.0;
  double tol = 1e-6;
  std::size_t max_iter = 100;
  std::string density_out;
  std::string report;
  std::string phase_out;
  std::vector<std::string> systems{"semiconductor", "soft_matter"};
  std::vector<std::size_t> sizes{1000};
};

SP2Config sp2_config(const Sp2Flags& f) {
  SP2Config c;
  c.n_occ = f.n_occ;
  c.threshold = f.threshold;
  c.idempotency_tol = f.tol;
  c.max_iterations = f.max_iter;
  return c;
}

// One Hamiltonian file: repeated proxy runs of each requested variant.
int run_sp2_file(const Sp2Flags& f, const CommonFlags& common) {
  const HarnessConfig cfg = harness(common);
  const perf::Topology topo = perf::detect_topology();
  std::vector<perf::PinAssignment> map;
  if (cfg.subset)
    map = perf::resolve_pin_map({cfg.placement, *cfg.subset, true}, topo);
  else
    map = perf::pin_map_for_count(cfg.placement, topo, cfg.thread_counts.empty() ? 1 : cfg.thread_counts.front());

  std::vector<perf::Variant> variants;
  if (cfg.only)
    variants = {*cfg.only};
  else
    variants = {perf::Variant::baseline, perf::Variant::tuned};

  std::ofstream report;
  if (!f.report.empty()) {
    report.open(f.report);
    if (!report) throw IoError("cannot create " + f.report);
  }

  bench::BenchRun run;
  std::vector<EllpackMatrix> densities;
  for (perf::Variant v : variants) {
    const bool tuned = v == perf::Variant::tuned;
    perf::WorkerPool pool = tuned ? perf::WorkerPool(perf::cpus_of(map)) : perf::WorkerPool(map.size());
    const ExecContext ctx{&pool, tuned ? perf::AllocPolicy::tuned() : perf::AllocPolicy::baseline()};
    std::vector<double> totals;
    SP2Result last;
    const std::size_t runs = common.reps + (common.no_warmup ? 0 : 1);
    for (std::size_t r = 0; r < runs; ++r) {
      last = run_proxy(f.in, sp2_config(f), ctx);
      if (r > 0 || common.no_warmup) totals.push_back(last.report.phase_times.total());
    }
    const perf::RunStats st = perf::summarize(totals);
    run.results.push_back({"sp2", bench::System::synthetic, last.density.n(), pool.size(), v,
                           totals.size(), st.min_s, st.median_s, st.stddev_s, checksum(last.density)});
    if (report.is_open()) {
      nlohmann::json j = report_json(last.report);
      j["variant"] = std::string(perf::to_string(v));
      j["threads"] = pool.size();
      report << j.dump() << '\n';
    }
    densities.push_back(std::move(last.density));
  }
  if (densities.size() == 2 && !identical(densities[0], densities[1]))
    run.mismatches.push_back({"sp2", bench::System::synthetic, densities[0].n(), map.size(),
                              "density matrices differ between variants"});
  if (!f.density_out.empty()) mm::write(f.density_out, densities.back(), mm::Symmetry::general);
  return finish(run, common.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Baseline vs tuned benchmarks for ELLPACK kernels and the SP2 solver"};
  app.require_subcommand(1);

  CommonFlags micro_f, spmm_f, sp2_f;

  auto* micro = app.add_subcommand("micro", "Strength reduction, first touch and alignment kernels");
  add_common(micro, micro_f);
  std::vector<std::string> kernels{"sr", "ft", "ma"};
  std::vector<std::size_t> micro_sizes{std::size_t{1} << 22};
  micro->add_option("--kernel", kernels, "Kernels to run (sr, ft, ma)")->delimiter(',');
  micro->add_option("--sizes", micro_sizes, "Array lengths")->delimiter(',');

  auto* spmm = app.add_subcommand("spmm", "ELLPACK x^2 sweep over model Hamiltonians");
  add_common(spmm, spmm_f);
  std::vector<std::string> spmm_systems{"metal", "semiconductor", "soft_matter"};
  std::vector<std::size_t> spmm_sizes = bench::kDefaultSpmmSizes;
  double spmm_threshold = kDefaultSparsityThreshold;
  spmm->add_option("--system", spmm_systems, "metal, semiconductor, softmatter")->delimiter(',');
  spmm->add_option("--sizes", spmm_sizes, "Matrix orders")->delimiter(',');
  spmm->add_option("--threshold", spmm_threshold, "ELLPACK pruning threshold");

  auto* sp2 = app.add_subcommand("sp2", "Phase-timed SP2 proxy runs");
  add_common(sp2, sp2_f);
  Sp2Flags sf;
  sp2->add_option("--in", sf.in, "Hamiltonian in Matrix Market format (single-file mode)")
      ->check(CLI::ExistingFile);
  sp2->add_option("--nocc", sf.n_occ, "Occupied states (default n/2)");
  sp2->add_option("--threshold", sf.threshold, "ELLPACK pruning threshold");
  sp2->add_option("--tol", sf.tol, "Idempotency tolerance");
  sp2->add_option("--max-iter", sf.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  sp2->add_option("--density-out", sf.density_out, "Write the density matrix (single-file mode)");
  sp2->add_option("--report", sf.report, "SP2 report as JSON lines (single-file mode)");
  sp2->add_option("--phase-out", sf.phase_out, "Phase CSV (generated-system mode)");
  sp2->add_option("--system", sf.systems, "semiconductor, softmatter (generated-system mode)")
      ->delimiter(',');
  sp2->add_option("--sizes", sf.sizes, "Matrix orders (generated-system mode)")->delimiter(',');

  auto* gen = app.add_subcommand("gen", "Write a model Hamiltonian");
  std::string gen_system;
  std::size_t gen_size = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  double gen_threshold = 0.0;
  gen->add_option("--system", gen_system, "metal, semiconductor, softmatter")->required();
  gen->add_option("--size", gen_size, "Matrix order (even)")->required();
  gen->add_option("--seed", gen_seed, "Noise seed");
  gen->add_option("--out", gen_out, "Matrix Market output path")->required();
  gen->add_option("--threshold", gen_threshold, "Drop entries with |h| <= threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*micro) {
      const HarnessConfig cfg = harness(micro_f);
      bench::BenchRun all;
      for (const auto& k : kernels) {
        auto r = bench::run_microbench(bench::parse_micro_kernel(k), micro_sizes, cfg);
        all.results.insert(all.results.end(), r.results.begin(), r.results.end());
        all.mismatches.insert(all.mismatches.end(), r.mismatches.begin(), r.mismatches.end());
      }
      return finish(all, micro_f.out);
    }
    if (*spmm) {
      HarnessConfig cfg = harness(spmm_f);
      cfg.threshold = spmm_threshold;
      return finish(bench::run_spmm_sweep(systems_of(spmm_systems), spmm_sizes, cfg), spmm_f.out);
    }
    if (*sp2) {
      if (!sf.in.empty()) return run_sp2_file(sf, sp2_f);
      HarnessConfig cfg = harness(sp2_f);
      const auto run = bench::run_sp2_bench(systems_of(sf.systems), sf.sizes, sp2_config(sf), cfg);
      if (!sf.phase_out.empty()) bench::emit_phase_csv(run.phases, sf.phase_out);
      return finish(run, sp2_f.out);
    }
    if (*gen) {
      ModelParams p = preset(parse_system(gen_system));
      p.seed = gen_seed;
      mm::write(gen_out, generate_ellpack(gen_size, p, gen_threshold), mm::Symmetry::symmetric);
      return 0;
    }
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << " after " << e.report().iterations << " iterations\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
