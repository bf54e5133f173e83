#include "sp2bench/perf/timing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sp2bench/error.hpp"

namespace sp2bench::perf {

RunStats summarize(std::span<const double> seconds) {
  if (seconds.empty()) throw InvalidArgument("no timings to summarize");
  std::vector<double> v(seconds.begin(), seconds.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  RunStats s;
  s.min_s = v.front();
  s.median_s = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  if (n > 1) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.stddev_s = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

}  // namespace sp2bench::perf
