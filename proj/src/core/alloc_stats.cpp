#include "pip/alloc_stats.hpp"

#include <atomic>

namespace pip::alloc {
namespace {

std::atomic<std::size_t> heap_current{0};
std::atomic<std::size_t> heap_peak{0};
std::atomic<std::size_t> scratch_current{0};
std::atomic<std::size_t> scratch_peak{0};
std::atomic<bool> installed{false};

void raise(std::atomic<std::size_t>& peak, std::size_t v) {
  std::size_t p = peak.load(std::memory_order_relaxed);
  while (v > p && !peak.compare_exchange_weak(p, v, std::memory_order_relaxed)) {
  }
}

}  // namespace

Snapshot snapshot() {
  Snapshot s;
  s.heap_current = heap_current.load(std::memory_order_relaxed);
  s.heap_peak = heap_peak.load(std::memory_order_relaxed);
  s.scratch_current = scratch_current.load(std::memory_order_relaxed);
  s.scratch_peak = scratch_peak.load(std::memory_order_relaxed);
  return s;
}

void reset_peaks() {
  heap_peak.store(heap_current.load(std::memory_order_relaxed),
                  std::memory_order_relaxed);
  scratch_peak.store(scratch_current.load(std::memory_order_relaxed),
                     std::memory_order_relaxed);
}

bool hook_installed() { return installed.load(std::memory_order_relaxed); }

Window::Window() {
  reset_peaks();
  const Snapshot s = snapshot();
  heap_base_ = s.heap_current;
  scratch_base_ = s.scratch_current;
}

std::size_t Window::heap_peak_delta() const {
  const std::size_t p = heap_peak.load(std::memory_order_relaxed);
  return p > heap_base_ ? p - heap_base_ : 0;
}

std::size_t Window::scratch_peak_delta() const {
  const std::size_t p = scratch_peak.load(std::memory_order_relaxed);
  return p > scratch_base_ ? p - scratch_base_ : 0;
}

namespace detail {

void on_heap_alloc(std::size_t bytes) {
  const std::size_t now =
      heap_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  raise(heap_peak, now);
}

void on_heap_free(std::size_t bytes) {
  heap_current.fetch_sub(bytes, std::memory_order_relaxed);
}

void on_scratch_acquire(std::size_t bytes) {
  const std::size_t now =
      scratch_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  raise(scratch_peak, now);
}

void on_scratch_release(std::size_t bytes) {
  scratch_current.fetch_sub(bytes, std::memory_order_relaxed);
}

void mark_hook_installed() { installed.store(true, std::memory_order_relaxed); }

}  // namespace detail
}  // namespace pip::alloc
