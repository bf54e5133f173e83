#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>

#include "sp2bench/error.hpp"
#include "sp2bench/perf/aligned_buffer.hpp"
#include "sp2bench/perf/kernels.hpp"

using namespace sp2bench;
using namespace sp2bench::perf;

namespace {

std::uint64_t ulps(double a, double b) {
  const auto x = std::bit_cast<std::int64_t>(a);
  const auto y = std::bit_cast<std::int64_t>(b);
  return static_cast<std::uint64_t>(x > y ? x - y : y - x);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("variant names") {
    CHECK(parse_variant("baseline") == Variant::baseline);
    CHECK(to_string(Variant::tuned) == "tuned");
    CHECK_THROWS_AS(parse_variant("fast"), ParseError);
  }

  TEST_CASE("strength reduction stays within 4 ulp per element") {
    for (std::size_t workers : {1u, 3u}) {
      WorkerPool pool(workers);
      for (double scale : {3.0, 0.7, -1e3}) {
        KernelProbe pb, pt;
        const auto b = kernel_sr(10000, scale, Variant::baseline, pool, &pb);
        const auto t = kernel_sr(10000, scale, Variant::tuned, pool, &pt);
        std::uint64_t worst = 0;
        for (std::size_t i = 0; i < pb.output.size(); ++i) {
          CHECK(pb.output[i] == (1.0 + static_cast<double>(i % 4096) / 4096.0) / scale);
          worst = std::max(worst, ulps(pb.output[i], pt.output[i]));
        }
        CHECK(worst <= 4);
        CHECK(std::fabs(b.checksum - t.checksum) <= 4 * 0x1p-52 * b.abs_sum + 1e-300);
      }
    }
  }

  TEST_CASE("strength reduction rejects a zero scale") {
    CHECK_THROWS_AS(kernel_sr(10, 0.0, Variant::tuned, serial_pool()), InvalidScale);
    CHECK_THROWS_AS(kernel_sr(0, 1.0, Variant::tuned, serial_pool()), InvalidArgument);
  }

  TEST_CASE("triad checksum is exactly 7n for both variants") {
    for (std::size_t workers : {1u, 2u, 4u}) {
      WorkerPool pool(workers);
      for (std::size_t n : {1u, 1000u, 65537u}) {
        const auto b = kernel_ft(n, Variant::baseline, pool);
        const auto t = kernel_ft(n, Variant::tuned, pool);
        CHECK(b.checksum == 7.0 * static_cast<double>(n));
        CHECK(t.checksum == b.checksum);
        CHECK(t.threads == workers);
      }
    }
  }

  TEST_CASE("tuned triad is computed by the worker that first touched each block") {
    for (std::size_t workers : {1u, 2u, 3u, 6u}) {
      WorkerPool pool(workers);
      for (std::size_t n : {5u, 4096u, 100003u}) {
        KernelProbe p;
        (void)kernel_ft(n, Variant::tuned, pool, &p);
        REQUIRE(p.touched.size() == workers);
        REQUIRE(p.computed.size() == workers);
        for (std::size_t w = 0; w < workers; ++w) {
          const Range expect = static_partition(n, workers, w);
          CHECK(p.touched[w] == p.computed[w]);
          if (expect.empty())
            CHECK(p.computed[w].empty());
          else
            CHECK(p.computed[w] == expect);
        }
      }
    }
  }

  TEST_CASE("alignment kernel: equal checksums, line-aligned tuned blocks") {
    for (std::size_t workers : {1u, 2u, 5u}) {
      WorkerPool pool(workers);
      for (std::size_t n : {8u, 999u, 50000u}) {
        KernelProbe pb, pt;
        const auto b = kernel_ma(n, Variant::baseline, pool, &pb);
        const auto t = kernel_ma(n, Variant::tuned, pool, &pt);
        CHECK(b.checksum == t.checksum);
        CHECK(pb.output == pt.output);
        for (std::size_t w = 0; w < workers; ++w) {
          CHECK(pt.touched[w] == pt.computed[w]);
          if (pt.chunk_starts[w] != 0) CHECK(pt.chunk_starts[w] % kCacheLine == 0);
        }
        if (pb.chunk_starts[0] != 0) CHECK(pb.chunk_starts[0] % kCacheLine == 8);
      }
    }
    CHECK(ma_grain(Variant::tuned) * sizeof(double) == kCacheLine);
    CHECK(ma_alignment(Variant::baseline) == 1);
  }
}
