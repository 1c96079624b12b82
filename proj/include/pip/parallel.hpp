#pragma once

#include <cstddef>
#include <memory>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/parallel_invoke.h>

namespace pip::par {

// Calls f(i) for i in [lo, hi); ranges no longer than grain run inline.
template <class F>
void for_each(std::size_t lo, std::size_t hi, std::size_t grain, F&& f) {
  if (hi <= lo) return;
  if (hi - lo <= grain) {
    for (std::size_t i = lo; i < hi; ++i) f(i);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<std::size_t>(lo, hi, grain),
                    [&](const tbb::blocked_range<std::size_t>& r) {
                      for (std::size_t i = r.begin(); i < r.end(); ++i) f(i);
                    });
}

template <class F, class G>
void pair(bool parallel, F&& f, G&& g) {
  if (parallel) {
    tbb::parallel_invoke(f, g);
  } else {
    f();
    g();
  }
}

std::size_t hardware_threads();

// Caps TBB parallelism for its lifetime; 0 keeps the default.
class ThreadLimit {
 public:
  explicit ThreadLimit(std::size_t threads);
  ~ThreadLimit();
  ThreadLimit(const ThreadLimit&) = delete;
  ThreadLimit& operator=(const ThreadLimit&) = delete;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pip::par
