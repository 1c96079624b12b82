#pragma once

#include <cstddef>

// Byte counters fed by the operator new/delete replacement in pip_alloc_hook
// and by the task-local scratch arenas. Executables that do not link the hook
// see zero heap traffic (hook_installed() == false).
namespace pip::alloc {

struct Snapshot {
  std::size_t heap_current = 0;
  std::size_t heap_peak = 0;
  std::size_t scratch_current = 0;
  std::size_t scratch_peak = 0;
};

Snapshot snapshot();

// Resets both peaks to the current values.
void reset_peaks();

bool hook_installed();

// Measures the peak increase of heap and scratch use over a scope.
class Window {
 public:
  Window();
  std::size_t heap_peak_delta() const;
  std::size_t scratch_peak_delta() const;

 private:
  std::size_t heap_base_;
  std::size_t scratch_base_;
};

namespace detail {
void on_heap_alloc(std::size_t bytes);
void on_heap_free(std::size_t bytes);
void on_scratch_acquire(std::size_t bytes);
void on_scratch_release(std::size_t bytes);
void mark_hook_installed();
}  // namespace detail

}  // namespace pip::alloc
