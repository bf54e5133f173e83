#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sp2bench/error.hpp"
#include "sp2bench/perf/partition.hpp"
#include "sp2bench/perf/worker_pool.hpp"

namespace sp2bench::perf {

inline constexpr std::size_t kCacheLine = 64;
inline constexpr std::size_t kPage = 4096;

enum class InitMode { serial_fill, parallel_first_touch };

/// How a buffer is placed and who writes it first.
///
/// alignment is one of 1 (word), 64 (cache line) or 4096 (page). Alignment 1
/// is the deliberately unaligned baseline: the start address is placed 8 bytes
/// past a cache-line boundary so that an allocator cannot align it by accident.
struct AllocPolicy {
  std::size_t alignment = kCacheLine;
  InitMode init_mode = InitMode::parallel_first_touch;
  double fill_value = 0.0;

  static AllocPolicy baseline() { return {1, InitMode::serial_fill, 0.0}; }
  static AllocPolicy tuned() { return {kCacheLine, InitMode::parallel_first_touch, 0.0}; }
};

inline bool valid_alignment(std::size_t a) noexcept { return a == 1 || a == kCacheLine || a == kPage; }

/// Owning, fixed-size, over-aligned array. Moves are cheap; copies are deep
/// and serial.
template <class T>
class AlignedBuffer {
  static_assert(8 % alignof(T) == 0, "baseline offset requires alignof(T) | 8");

 public:
  AlignedBuffer() = default;

  /// Uninitialized storage for `count` elements.
  AlignedBuffer(std::size_t count, std::size_t alignment) : size_(count), alignment_(alignment) {
    if (!valid_alignment(alignment))
      throw InvalidArgument("alignment must be 1, 64 or 4096, got " + std::to_string(alignment));
    if (count == 0) return;
    const std::size_t raw_align = alignment == 1 ? kCacheLine : alignment;
    const std::size_t offset = alignment == 1 ? 8 : 0;
    raw_bytes_ = count * sizeof(T) + offset;
    raw_align_ = raw_align;
    try {
      raw_ = ::operator new(raw_bytes_, std::align_val_t{raw_align_});
    } catch (const std::bad_alloc&) {
      throw AllocationFailure("cannot allocate " + std::to_string(raw_bytes_) + " bytes");
    }
    data_ = reinterpret_cast<T*>(static_cast<std::byte*>(raw_) + offset);
  }

  AlignedBuffer(const AlignedBuffer& other) : AlignedBuffer(other.size_, other.alignment_) {
    std::copy(other.begin(), other.end(), data_);
  }
  AlignedBuffer(AlignedBuffer&& other) noexcept { swap(other); }
  AlignedBuffer& operator=(AlignedBuffer other) noexcept {
    swap(other);
    return *this;
  }
  ~AlignedBuffer() {
    if (raw_) ::operator delete(raw_, raw_bytes_, std::align_val_t{raw_align_});
  }

  void swap(AlignedBuffer& o) noexcept {
    std::swap(raw_, o.raw_);
    std::swap(data_, o.data_);
    std::swap(size_, o.size_);
    std::swap(alignment_, o.alignment_);
    std::swap(raw_bytes_, o.raw_bytes_);
    std::swap(raw_align_, o.raw_align_);
  }

  T* data() noexcept { return data_; }
  const T* data() const noexcept { return data_; }
  std::size_t size() const noexcept { return size_; }
  /// Alignment requested by the policy (1, 64 or 4096).
  std::size_t alignment() const noexcept { return alignment_; }
  /// Alignment the start address actually satisfies.
  std::size_t guaranteed_alignment() const noexcept { return alignment_ == 1 ? 8 : alignment_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }
  T* begin() noexcept { return data_; }
  T* end() noexcept { return data_ + size_; }
  const T* begin() const noexcept { return data_; }
  const T* end() const noexcept { return data_ + size_; }
  std::span<T> span() noexcept { return {data_, size_}; }
  std::span<const T> span() const noexcept { return {data_, size_}; }

 private:
  void* raw_ = nullptr;
  T* data_ = nullptr;
  std::size_t size_ = 0;
  std::size_t alignment_ = 1;
  std::size_t raw_bytes_ = 0;
  std::size_t raw_align_ = kCacheLine;
};

/// Writes `value` into every element, either from the calling thread or from
/// the pool workers over static_partition(count, workers, w, grain). When
/// `touched` is non-null it receives the range each worker wrote (empty
/// ranges for idle workers, or one range for worker 0 in serial mode).
template <class T>
void initialize(AlignedBuffer<T>& buf, T value, InitMode mode, WorkerPool& pool,
                std::size_t grain = 1, std::vector<Range>* touched = nullptr) {
  if (mode == InitMode::serial_fill) {
    std::fill(buf.begin(), buf.end(), value);
    if (touched) {
      touched->assign(pool.size(), Range{});
      (*touched)[0] = {0, buf.size()};
    }
    return;
  }
  if (touched) touched->assign(pool.size(), Range{});
  T* data = buf.data();
  pool.parallel_for(
      buf.size(),
      [&](std::size_t b, std::size_t e, std::size_t w) {
        std::fill(data + b, data + e, value);
        if (touched) (*touched)[w] = {b, e};
      },
      grain);
}

/// Allocates and initializes `count` elements according to `policy`.
template <class T = double>
AlignedBuffer<T> allocate(std::size_t count, const AllocPolicy& policy, WorkerPool& pool,
                          std::size_t grain = 1, std::vector<Range>* touched = nullptr) {
  if (count == 0) throw InvalidArgument("allocation count must be positive");
  AlignedBuffer<T> buf(count, policy.alignment);
  initialize(buf, static_cast<T>(policy.fill_value), policy.init_mode, pool, grain, touched);
  return buf;
}

inline std::uintptr_t address_of(const void* p) noexcept { return reinterpret_cast<std::uintptr_t>(p); }

}  // namespace sp2bench::perf
