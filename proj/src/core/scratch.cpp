#include "pip/scratch.hpp"

#include <cstdlib>
#include <new>

#include "pip/alloc_stats.hpp"

namespace pip::scratch::detail {
namespace {

struct Arena {
  char* base = nullptr;
  std::size_t cap = 0;
  std::size_t top = 0;
  std::size_t wanted = 0;

  ~Arena() { std::free(base); }
};

thread_local Arena arena;

}  // namespace

void* acquire(std::size_t bytes, bool& dedicated) {
  Arena& a = arena;
  if (a.top == 0 && a.wanted > a.cap) {
    std::free(a.base);
    a.base = static_cast<char*>(std::malloc(a.wanted));
    if (a.base == nullptr) throw std::bad_alloc();
    a.cap = a.wanted;
  }
  alloc::detail::on_scratch_acquire(bytes);
  if (a.top + bytes <= a.cap) {
    void* p = a.base + a.top;
    a.top += bytes;
    dedicated = false;
    return p;
  }
  if (a.top + bytes > a.wanted) a.wanted = a.top + bytes;
  void* p = std::malloc(bytes == 0 ? 1 : bytes);
  if (p == nullptr) throw std::bad_alloc();
  dedicated = true;
  return p;
}

void release(void* p, std::size_t bytes, bool dedicated) {
  alloc::detail::on_scratch_release(bytes);
  if (dedicated) {
    std::free(p);
    return;
  }
  arena.top -= bytes;
}

}  // namespace pip::scratch::detail
