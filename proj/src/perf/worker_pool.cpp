#include "sp2bench/perf/worker_pool.hpp"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <string>

#include "sp2bench/error.hpp"

namespace sp2bench::perf {

namespace {

int bind_current_thread(int cpu) {
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  return pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
}

}  // namespace

WorkerPool::WorkerPool(std::size_t workers) : size_(workers == 0 ? 1 : workers) {
  if (size_ > 1) start_threads();
}

WorkerPool::WorkerPool(std::vector<int> cpus) : size_(cpus.size()), cpus_(std::move(cpus)) {
  if (size_ == 0) throw InvalidArgument("pinned pool needs at least one CPU");
  start_threads();
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::start_threads() {
  errors_.assign(size_, nullptr);
  pin_status_.assign(size_, -1);
  threads_.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) threads_.emplace_back([this, i] { worker_loop(i); });

  // Wait until every worker has attempted its binding.
  std::unique_lock lock(mutex_);
  done_.wait(lock, [this] {
    for (int s : pin_status_)
      if (s < 0) return false;
    return true;
  });
  for (std::size_t i = 0; i < size_; ++i) {
    if (pin_status_[i] != 0) {
      const int err = pin_status_[i];
      lock.unlock();
      // Destructor does not run for a throwing constructor.
      {
        std::lock_guard g(mutex_);
        stopping_ = true;
      }
      wake_.notify_all();
      for (auto& t : threads_) t.join();
      threads_.clear();
      throw TopologyExceeded("cannot bind worker " + std::to_string(i) + " to CPU " +
                             std::to_string(cpus_[i]) + ": " + std::strerror(err));
    }
  }
}

void WorkerPool::worker_loop(std::size_t id) {
  int status = 0;
  if (!cpus_.empty()) status = bind_current_thread(cpus_[id]);
  std::uint64_t seen = 0;
  {
    std::lock_guard lock(mutex_);
    pin_status_[id] = status;
    seen = generation_;
  }
  done_.notify_all();

  for (;;) {
    const Task* task = nullptr;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      task = task_;
    }
    std::exception_ptr err;
    try {
      (*task)(id);
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      errors_[id] = err;
      if (--remaining_ == 0) done_.notify_all();
    }
  }
}

void WorkerPool::run(const Task& task) {
  if (threads_.empty()) {
    task(0);
    return;
  }
  {
    std::unique_lock lock(mutex_);
    task_ = &task;
    remaining_ = size_;
    std::fill(errors_.begin(), errors_.end(), nullptr);
    ++generation_;
  }
  wake_.notify_all();
  std::unique_lock lock(mutex_);
  done_.wait(lock, [this] { return remaining_ == 0; });
  task_ = nullptr;
  for (auto& e : errors_) {
    if (e) {
      auto first = e;
      lock.unlock();
      std::rethrow_exception(first);
    }
  }
}

std::vector<int> WorkerPool::observed_cpus() {
  std::vector<int> out(size_, -1);
  run([&](std::size_t w) { out[w] = sched_getcpu(); });
  return out;
}

WorkerPool& serial_pool() {
  static WorkerPool pool(1);
  return pool;
}

}  // namespace sp2bench::perf
