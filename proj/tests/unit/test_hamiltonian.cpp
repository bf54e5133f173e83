#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "sp2bench/dense_oracle.hpp"
#include "sp2bench/error.hpp"
#include "sp2bench/hamiltonian.hpp"

using namespace sp2bench;

TEST_SUITE("hamiltonian") {
  TEST_CASE("two orbitals with on-site energies only") {
    ModelParams p;
    p.eps_A = -10.0;
    const DenseMatrix h = generate(2, p);
    CHECK(h == DenseMatrix(2, {-10.0, 0.0, 0.0, 0.0}));
  }

  TEST_CASE("orbitals are interleaved A, B per dimer") {
    ModelParams p;
    p.eps_A = 1.0;
    p.eps_B = 2.0;
    p.delta_AB_intra = 3.0;
    p.delta_AA = 4.0;
    p.delta_BB = 5.0;
    p.delta_AB_cross = 6.0;
    const DenseMatrix h = generate(4, p);
    CHECK(h(0, 0) == 1.0);
    CHECK(h(1, 1) == 2.0);
    CHECK(h(0, 1) == 3.0);
    CHECK(h(2, 3) == 3.0);
    CHECK(h(0, 2) == 4.0);
    CHECK(h(1, 3) == 5.0);
    CHECK(h(0, 3) == 6.0);
    CHECK(h(1, 2) == 6.0);
  }

  TEST_CASE("metal couplings decay with dimer distance") {
    const DenseMatrix h = generate(64, preset(SystemKind::metal));
    for (std::size_t d = 1; d < 32; ++d) {
      CHECK(h(0, 2 * d) == doctest::Approx(-std::exp(-0.01 * static_cast<double>(d))).epsilon(1e-15));
      CHECK(h(1, 2 * d + 1) == h(0, 2 * d));
      CHECK(h(0, 2 * d + 1) == 0.0);
    }
    CHECK(h(0, 1) == 0.0);
  }

  TEST_CASE("couplings below the cutoff are not stored") {
    ModelParams p;
    p.delta_AA = 1.0;
    p.k = -1.0;
    const DenseMatrix h = generate(200, p);
    // exp(-32) = 1.27e-14 is kept, exp(-33) = 4.7e-15 is not.
    CHECK(h(0, 64) == doctest::Approx(std::exp(-32.0)));
    CHECK(h(0, 66) == 0.0);
    CHECK(h(10, 76) == 0.0);
  }

  TEST_CASE("presets") {
    const auto m = preset(SystemKind::metal);
    CHECK(m.delta_AA == -1.0);
    CHECK(m.delta_BB == -1.0);
    CHECK(m.delta_AB_intra == 0.0);
    CHECK(m.k == -0.01);
    CHECK(m.r == 0.0);
    const auto s = preset(SystemKind::semiconductor);
    CHECK(s.delta_AA == 0.0);
    CHECK(s.delta_BB == -1.0);
    CHECK(s.delta_AB_intra == -2.0);
    CHECK(s.k == -0.01);
    const auto f = preset(SystemKind::soft_matter);
    CHECK(f.eps_A == -10.0);
    CHECK(f.eps_B == 0.0);
    CHECK(f.delta_BB == -1.0);
    CHECK(f.delta_AB_intra == -1.0);
    CHECK(f.k == -0.1);
    CHECK(f.r == 1.0);
    CHECK(parse_system("softmatter") == SystemKind::soft_matter);
    CHECK(to_string(SystemKind::semiconductor) == "semiconductor");
    CHECK_THROWS_AS(parse_system("insulator"), ParseError);
  }

  TEST_CASE("noisy matrices are exactly symmetric and seed-determined") {
    auto p = preset(SystemKind::soft_matter);
    p.seed = 7;
    const DenseMatrix a = generate(60, p);
    CHECK(a.is_symmetric(0.0));
    CHECK(generate(60, p) == a);
    p.seed = 8;
    CHECK_FALSE(generate(60, p) == a);
  }

  TEST_CASE("pair noise is symmetric and inside [-1, 1)") {
    double lo = 1, hi = -1, sum = 0;
    for (std::size_t i = 0; i < 200; ++i)
      for (std::size_t j = 0; j < 200; ++j) {
        const double u = pair_noise(3, i, j);
        CHECK(u == pair_noise(3, j, i));
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
      }
    CHECK(lo >= -1.0);
    CHECK(hi < 1.0);
    CHECK(lo < -0.99);
    CHECK(hi > 0.99);
    CHECK(std::fabs(sum / 40000.0) < 0.02);
  }

  TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(generate(7, preset(SystemKind::metal)), InvalidDimension);
    auto p = preset(SystemKind::metal);
    p.k = 0.1;
    CHECK_THROWS_AS(generate(8, p), InvalidArgument);
    p = preset(SystemKind::metal);
    p.r = -1;
    CHECK_THROWS_AS(generate(8, p), InvalidArgument);
  }

  TEST_CASE("generate_ellpack equals the pruned dense matrix") {
    for (SystemKind k : {SystemKind::metal, SystemKind::semiconductor, SystemKind::soft_matter}) {
      auto p = preset(k);
      p.seed = 11;
      const DenseMatrix d = generate(100, p);
      for (double t : {0.0, 1e-10, 1e-3}) {
        const auto e = generate_ellpack(100, p, t);
        CHECK(identical(e, from_dense(d, t, e.m_max())));
        CHECK(e.m_max() == std::max<std::size_t>(1, max_row_count(d, t)));
        CHECK(sparsity(e, t) == doctest::Approx(sparsity(d, t)).epsilon(1e-15));
      }
    }
    CHECK_THROWS_AS(generate_ellpack(100, preset(SystemKind::metal), 0.0, {}, 3), OverflowError);
  }

  TEST_CASE("sparsity counts entries at or below threshold") {
    CHECK(sparsity(DenseMatrix(4), 0.0) == 1.0);
    CHECK(sparsity(DenseMatrix::identity(4), 0.0) == 0.75);
    CHECK(sparsity(DenseMatrix::identity(4), 1.0) == 1.0);
    CHECK(sparsity(identity(4, 1), 0.0) == 0.75);
    CHECK_THROWS_AS(sparsity(DenseMatrix(2), -1.0), InvalidArgument);
  }

  TEST_CASE("DOS of simple spectra") {
    const DenseMatrix i3 = DenseMatrix::identity(3);
    const auto d = dos(i3, 401, 0.1);
    const auto peak = std::max_element(d.density.begin(), d.density.end()) - d.density.begin();
    CHECK(d.energies[static_cast<std::size_t>(peak)] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.density[static_cast<std::size_t>(peak)] ==
          doctest::Approx(3.0 / (0.1 * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-12));

    const auto s = dos(DenseMatrix(2, {-1, 0, 0, 1}), 301, 0.2);
    for (std::size_t b = 0; b < 301; ++b) CHECK(s.density[b] == doctest::Approx(s.density[300 - b]));

    const auto shifted = dos(DenseMatrix(2, {-1, 0, 0, 1}), 301, 0.2, 1.0);
    CHECK(shifted.energies.front() == doctest::Approx(s.energies.front() - 1.0));
    CHECK_THROWS_AS(dos(DenseMatrix(2, {0, 1, 0, 0}), 10, 0.1), InvalidArgument);
  }

  TEST_CASE("DOS integrates to the orbital count") {
    const auto d = dos(generate(64, preset(SystemKind::semiconductor)), 2000, 0.05);
    double integral = 0.0;
    for (std::size_t b = 1; b < d.energies.size(); ++b)
      integral += 0.5 * (d.density[b] + d.density[b - 1]) * (d.energies[b] - d.energies[b - 1]);
    CHECK(integral == doctest::Approx(64.0).epsilon(0.01));
  }

  TEST_CASE("metal has states at the Fermi level") {
    const DenseMatrix h = generate(128, preset(SystemKind::metal));
    const auto ev = oracle::eigh(h).values;
    const double ef = fermi_level(ev, 64);
    const auto d = dos_from_eigenvalues(ev, 2000, 0.05, ef);
    CHECK(density_at(d, 0.0) > 0.0);
    CHECK(fermi_level(h, 64) == doctest::Approx(ef));
    CHECK_THROWS_AS(fermi_level(ev, 0), InvalidArgument);
    CHECK_THROWS_AS(fermi_level(ev, 128), InvalidArgument);
  }
}
