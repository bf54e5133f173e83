#include "sp2bench/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sp2bench/dense_oracle.hpp"
#include "sp2bench/error.hpp"

namespace sp2bench {

void ModelParams::validate() const {
  for (double v : {eps_A, eps_B, delta_AA, delta_BB, delta_AB_intra, delta_AB_cross, k, r})
    if (!std::isfinite(v)) throw InvalidArgument("model parameters must be finite");
  if (k > 0) throw InvalidArgument("decay constant k must be <= 0, got " + std::to_string(k));
  if (r < 0) throw InvalidArgument("noise factor r must be >= 0, got " + std::to_string(r));
}

SystemKind parse_system(std::string_view name) {
  if (name == "metal") return SystemKind::metal;
  if (name == "semiconductor") return SystemKind::semiconductor;
  if (name == "soft_matter" || name == "softmatter") return SystemKind::soft_matter;
  throw ParseError("unknown system", std::string(name));
}

std::string_view to_string(SystemKind kind) noexcept {
  switch (kind) {
    case SystemKind::metal: return "metal";
    case SystemKind::semiconductor: return "semiconductor";
    case SystemKind::soft_matter: return "soft_matter";
  }
  return "?";
}

ModelParams preset(SystemKind kind) {
  ModelParams p;
  switch (kind) {
    case SystemKind::metal:
      p.delta_AA = -1.0;
      p.delta_BB = -1.0;
      p.k = -0.01;
      break;
    case SystemKind::semiconductor:
      p.delta_BB = -1.0;
      p.delta_AB_intra = -2.0;
      p.k = -0.01;
      break;
    case SystemKind::soft_matter:
      p.delta_BB = -1.0;
      p.delta_AB_intra = -1.0;
      p.eps_A = -10.0;
      p.k = -0.1;
      p.r = 1.0;
      break;
  }
  return p;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double pair_noise(std::uint64_t seed, std::size_t i, std::size_t j) noexcept {
  const auto lo = static_cast<std::uint64_t>(std::min(i, j));
  const auto hi = static_cast<std::uint64_t>(std::max(i, j));
  const std::uint64_t u = splitmix64(seed ^ splitmix64((lo << 32) | hi));
  return 2.0 * (static_cast<double>(u >> 11) * 0x1.0p-53) - 1.0;
}

namespace {

// Largest dimer separation at which a coupling class is still stored, or -1
// when it never is.
long long reach(double delta, const ModelParams& p, std::size_t dimers) {
  const double amp = std::fabs(delta) * (1.0 + p.r);
  if (amp < kCouplingCutoff) return -1;
  if (p.k == 0.0) return static_cast<long long>(dimers);
  const double d = std::log(kCouplingCutoff / amp) / p.k;
  if (d >= static_cast<double>(dimers)) return static_cast<long long>(dimers);
  long long dm = static_cast<long long>(std::floor(d));
  // Guard the boundary against log/exp rounding.
  while (dm >= 0 && amp * std::exp(p.k * static_cast<double>(dm)) < kCouplingCutoff) --dm;
  while (amp * std::exp(p.k * static_cast<double>(dm + 1)) >= kCouplingCutoff) ++dm;
  return dm;
}

class Model {
 public:
  Model(std::size_t n, const ModelParams& p) : n_(n), p_(p) {
    if (n % 2 != 0) throw InvalidDimension("orbital count must be even, got " + std::to_string(n));
    p.validate();
    const std::size_t dimers = n / 2;
    r_intra_ = reach(p.delta_AB_intra, p, dimers) >= 0;
    r_aa_ = reach(p.delta_AA, p, dimers);
    r_bb_ = reach(p.delta_BB, p, dimers);
    r_ab_ = reach(p.delta_AB_cross, p, dimers);
    widest_ = std::max({r_aa_, r_bb_, r_ab_, r_intra_ ? 0LL : -1LL, 0LL});
  }

  // Calls f(j, h_ij) for every stored column of row i, ascending j.
  template <class F>
  void row(std::size_t i, F&& f) const {
    const auto dimers = static_cast<long long>(n_ / 2);
    const auto di = static_cast<long long>(i / 2);
    const long long lo = std::max(0LL, di - widest_);
    const long long hi = std::min(dimers - 1, di + widest_);
    for (long long q = lo; q <= hi; ++q) {
      for (std::size_t t = 0; t < 2; ++t) {
        const std::size_t j = static_cast<std::size_t>(2 * q) + t;
        double v = 0.0;
        if (value(i, j, v)) f(j, v);
      }
    }
  }

  std::size_t n() const { return n_; }

 private:
  bool value(std::size_t i, std::size_t j, double& out) const {
    const double rand = p_.r == 0.0 ? 0.0 : pair_noise(p_.seed, i, j);
    if (i == j) {
      out = (i % 2 == 0 ? p_.eps_A : p_.eps_B) * (1.0 + p_.r * rand);
      return true;
    }
    const std::size_t pi = i / 2, pj = j / 2;
    const auto d = static_cast<long long>(pi > pj ? pi - pj : pj - pi);
    double delta = 0.0;
    long long limit = -1;
    if (d == 0) {
      delta = p_.delta_AB_intra;
      limit = r_intra_ ? 0 : -1;
    } else if (i % 2 == 0 && j % 2 == 0) {
      delta = p_.delta_AA;
      limit = r_aa_;
    } else if (i % 2 == 1 && j % 2 == 1) {
      delta = p_.delta_BB;
      limit = r_bb_;
    } else {
      delta = p_.delta_AB_cross;
      limit = r_ab_;
    }
    if (d > limit) return false;
    out = delta * (1.0 + p_.r * rand) * std::exp(p_.k * static_cast<double>(d));
    return true;
  }

  std::size_t n_;
  ModelParams p_;
  bool r_intra_ = false;
  long long r_aa_ = -1, r_bb_ = -1, r_ab_ = -1;
  long long widest_ = 0;
};

}  // namespace

DenseMatrix generate(std::size_t n, const ModelParams& p) {
  const Model model(n, p);
  DenseMatrix h(n);
  for (std::size_t i = 0; i < n; ++i) model.row(i, [&](std::size_t j, double v) { h(i, j) = v; });
  return h;
}

EllpackMatrix generate_ellpack(std::size_t n, const ModelParams& p, double threshold,
                               const ExecContext& ctx, std::size_t m_max) {
  if (threshold < 0) throw InvalidArgument("threshold must be >= 0");
  const Model model(n, p);
  auto& pool = ctx.workers();

  std::vector<std::size_t> counts(n, 0);
  pool.parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i)
      model.row(i, [&](std::size_t, double v) {
        if (std::fabs(v) > threshold) ++counts[i];
      });
  });
  const std::size_t widest = n == 0 ? 0 : *std::max_element(counts.begin(), counts.end());
  const std::size_t width = m_max == 0 ? std::max<std::size_t>(widest, 1) : m_max;
  for (std::size_t i = 0; i < n; ++i)
    if (counts[i] > width) throw OverflowError(i, counts[i], width);

  EllpackMatrix a(n, width, ctx);
  RowWriter out(a);
  pool.parallel_for(n, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t k = 0;
      double* vals = out.values(i);
      Index* cols = out.cols(i);
      model.row(i, [&](std::size_t j, double v) {
        if (std::fabs(v) > threshold) {
          vals[k] = v;
          cols[k] = static_cast<Index>(j);
          ++k;
        }
      });
      out.set_nnz(i, k);
    }
  });
  return a;
}

double sparsity(const DenseMatrix& h, double threshold) {
  if (threshold < 0) throw InvalidArgument("threshold must be >= 0");
  const auto vals = h.values();
  if (vals.empty()) return 1.0;
  std::size_t small = 0;
  for (double v : vals)
    if (std::fabs(v) <= threshold) ++small;
  return static_cast<double>(small) / static_cast<double>(vals.size());
}

double sparsity(const EllpackMatrix& h, double threshold) {
  if (threshold < 0) throw InvalidArgument("threshold must be >= 0");
  const double total = static_cast<double>(h.n()) * static_cast<double>(h.n());
  if (total == 0) return 1.0;
  std::size_t big = 0;
  for (std::size_t i = 0; i < h.n(); ++i)
    for (double v : h.row_values(i))
      if (std::fabs(v) > threshold) ++big;
  return 1.0 - static_cast<double>(big) / total;
}

DOSHistogram dos_from_eigenvalues(const std::vector<double>& eigenvalues, std::size_t bins,
                                  double broadening, double reference) {
  if (bins < 2) throw InvalidArgument("dos needs at least 2 bins");
  if (!(broadening > 0)) throw InvalidArgument("dos broadening must be > 0");
  if (eigenvalues.empty()) throw InvalidArgument("dos of an empty spectrum");
  const auto [mn, mx] = std::minmax_element(eigenvalues.begin(), eigenvalues.end());
  const double lo = *mn - reference - 5.0 * broadening;
  const double hi = *mx - reference + 5.0 * broadening;
  const double step = (hi - lo) / static_cast<double>(bins - 1);

  DOSHistogram out;
  out.broadening = broadening;
  out.energies.resize(bins);
  out.density.assign(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) out.energies[b] = lo + step * static_cast<double>(b);
  const double norm = 1.0 / (broadening * std::sqrt(2.0 * std::numbers::pi));
  const double inv2s2 = 1.0 / (2.0 * broadening * broadening);
  for (double lambda : eigenvalues) {
    const double e0 = lambda - reference;
    // Gaussian tails beyond 8 sigma are below double resolution of the peak.
    const double span = 8.0 * broadening;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::floor((e0 - span - lo) / step)));
    for (std::size_t b = first; b < bins; ++b) {
      const double x = out.energies[b] - e0;
      if (x > span) break;
      out.density[b] += norm * std::exp(-x * x * inv2s2);
    }
  }
  return out;
}

DOSHistogram dos(const DenseMatrix& h, std::size_t bins, double broadening, double reference) {
  if (!h.is_symmetric()) throw InvalidArgument("dos requires a symmetric matrix");
  return dos_from_eigenvalues(oracle::eigh(h).values, bins, broadening, reference);
}

double density_at(const DOSHistogram& d, double e) noexcept {
  const auto& x = d.energies;
  if (x.size() < 2 || e < x.front() || e > x.back()) return 0.0;
  const auto it = std::upper_bound(x.begin(), x.end(), e);
  const std::size_t b = it == x.end() ? x.size() - 1 : static_cast<std::size_t>(it - x.begin());
  const double t = (e - x[b - 1]) / (x[b] - x[b - 1]);
  return d.density[b - 1] + t * (d.density[b] - d.density[b - 1]);
}

double fermi_level(const std::vector<double>& ev, std::size_t n_occ) {
  if (n_occ == 0 || n_occ >= ev.size())
    throw InvalidArgument("fermi_level needs 0 < n_occ < n");
  return 0.5 * (ev[n_occ - 1] + ev[n_occ]);
}

double fermi_level(const DenseMatrix& h, std::size_t n_occ) {
  return fermi_level(oracle::eigh(h).values, n_occ);
}

}  // namespace sp2bench
