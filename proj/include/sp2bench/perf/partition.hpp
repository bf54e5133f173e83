#pragma once

#include <cstddef>

namespace sp2bench::perf {

/// Half-open index range [begin, end).
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return begin == end; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Static contiguous partition of [0, count) over `workers`, in whole units of
/// `grain` elements. Earlier workers receive the remainder units, and only the
/// last non-empty block may hold a partial unit. Every worker that computes on
/// a block is expected to be the one that first touched it.
constexpr Range static_partition(std::size_t count, std::size_t workers,
                                 std::size_t worker, std::size_t grain = 1) noexcept {
  if (workers == 0 || worker >= workers || count == 0) return {};
  if (grain == 0) grain = 1;
  const std::size_t units = (count + grain - 1) / grain;
  const std::size_t base = units / workers;
  const std::size_t extra = units % workers;
  const std::size_t first_unit = worker * base + (worker < extra ? worker : extra);
  const std::size_t n_units = base + (worker < extra ? 1 : 0);
  std::size_t begin = first_unit * grain;
  std::size_t end = (first_unit + n_units) * grain;
  if (begin > count) begin = count;
  if (end > count) end = count;
  return {begin, end};
}

}  // namespace sp2bench::perf
