#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "sp2bench/perf/partition.hpp"

namespace sp2bench::perf {

/// Fixed set of worker threads created once and reused for every parallel
/// region. Work is split with static_partition only; there is no stealing, so
/// a given (count, workers, grain) always maps the same indices to the same
/// worker.
///
/// A pool may be pinned: worker w is bound to logical CPU cpus[w] for the
/// lifetime of the pool. An unpinned single-worker pool runs tasks inline on
/// the calling thread.
class WorkerPool {
 public:
  using Task = std::function<void(std::size_t worker)>;

  explicit WorkerPool(std::size_t workers = 1);
  /// One pinned worker per entry of `cpus`. Throws TopologyExceeded if the OS
  /// rejects a binding.
  explicit WorkerPool(std::vector<int> cpus);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return size_; }
  bool pinned() const noexcept { return !cpus_.empty(); }
  const std::vector<int>& cpus() const noexcept { return cpus_; }

  /// Runs task(w) for every worker w and blocks until all return. The first
  /// exception (lowest worker index) is rethrown on the caller.
  void run(const Task& task);

  /// body(begin, end, worker) over the static partition of [0, count).
  /// Workers with an empty block are not called.
  template <class Body>
  void parallel_for(std::size_t count, Body&& body, std::size_t grain = 1) {
    const std::size_t workers = size_;
    run([&](std::size_t w) {
      const Range r = static_partition(count, workers, w, grain);
      if (!r.empty()) body(r.begin, r.end, w);
    });
  }

  /// Logical CPU each worker is currently executing on (-1 if unknown).
  std::vector<int> observed_cpus();

 private:
  void start_threads();
  void worker_loop(std::size_t id);

  std::size_t size_;
  std::vector<int> cpus_;
  std::vector<std::thread> threads_;

  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const Task* task_ = nullptr;
  std::uint64_t generation_ = 0;
  std::size_t remaining_ = 0;
  bool stopping_ = false;
  std::vector<std::exception_ptr> errors_;
  std::vector<int> pin_status_;
};

/// Process-wide single-worker inline pool used when callers pass none.
WorkerPool& serial_pool();

}  // namespace sp2bench::perf
