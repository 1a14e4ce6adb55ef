#pragma once

// Data-parallel loop kernels. Every kernel has a serial path that is the
// reference implementation; the OpenMP path must produce identical results.

#include <omp.h>

#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>

namespace gnep {

enum class Exec { Serial, Parallel };

namespace detail {

class ExceptionSlot {
 public:
  void capture() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!error_) error_ = std::current_exception();
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace detail

/// Calls fn(k) for k in [0, n). Exceptions thrown by fn are propagated after
/// the loop (the first captured one wins).
template <class Fn>
void for_each_index(Exec exec, std::size_t n, Fn&& fn) {
  if (exec == Exec::Serial || n < 2) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  detail::ExceptionSlot slot;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long k = 0; k < count; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
      slot.capture();
    }
  }
  slot.rethrow();
}

/// Smallest k in [0, n) with pred(k) true. The parallel path evaluates
/// indices out of order but still returns the smallest hit, so the result
/// does not depend on scheduling. An exception is rethrown only if it was
/// raised at an index below the first hit, as in the serial loop.
template <class Pred>
std::optional<std::size_t> find_first(Exec exec, std::size_t n, Pred&& pred) {
  if (exec == Exec::Serial || n < 2) {
    for (std::size_t k = 0; k < n; ++k)
      if (pred(k)) return k;
    return std::nullopt;
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::atomic<std::size_t> best{kNone};
  std::mutex error_mutex;
  std::size_t error_index = kNone;
  std::exception_ptr error;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    if (idx >= best.load(std::memory_order_relaxed)) continue;
    try {
      if (pred(idx)) {
        std::size_t cur = best.load();
        while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (idx < error_index) {
        error_index = idx;
        error = std::current_exception();
      }
      std::size_t cur = best.load();
      while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
      }
    }
  }
  const std::size_t hit = best.load();
  if (error && error_index == hit) std::rethrow_exception(error);
  if (hit == kNone) return std::nullopt;
  return hit;
}

}  // namespace gnep
