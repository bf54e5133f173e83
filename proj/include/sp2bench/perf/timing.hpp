#pragma once

#include <chrono>
#include <span>

namespace sp2bench::perf {

/// Monotonic wall-clock stopwatch.
class Stopwatch {
 public:
  using clock = std::chrono::steady_clock;

  Stopwatch() : start_(clock::now()) {}
  void reset() { start_ = clock::now(); }
  double seconds() const { return std::chrono::duration<double>(clock::now() - start_).count(); }

 private:
  clock::time_point start_;
};

struct RunStats {
  double min_s = 0.0;
  double median_s = 0.0;
  /// Sample standard deviation (0 for a single repetition).
  double stddev_s = 0.0;
};

RunStats summarize(std::span<const double> seconds);

}  // namespace sp2bench::perf
