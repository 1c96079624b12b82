// Replaces the global allocation functions so pip::alloc can report heap
// traffic. Linked only into executables.
#include <cstdlib>
#include <new>

#include "pip/alloc_stats.hpp"

namespace {

constexpr std::size_t kHeader = 16;

void* counted_alloc(std::size_t n, std::size_t align) {
  const std::size_t header = align > kHeader ? align : kHeader;
  void* raw = align > kHeader ? std::aligned_alloc(align, (n + header + align - 1) / align * align)
                              : std::malloc(n + header);
  if (raw == nullptr) return nullptr;
  auto* base = static_cast<unsigned char*>(raw);
  unsigned char* user = base + header;
  reinterpret_cast<std::size_t*>(user)[-1] = n;
  reinterpret_cast<std::size_t*>(user)[-2] = header;
  pip::alloc::detail::on_heap_alloc(n);
  return user;
}

void counted_free(void* p) {
  if (p == nullptr) return;
  auto* user = static_cast<unsigned char*>(p);
  const std::size_t n = reinterpret_cast<std::size_t*>(user)[-1];
  const std::size_t header = reinterpret_cast<std::size_t*>(user)[-2];
  pip::alloc::detail::on_heap_free(n);
  std::free(user - header);
}

void* alloc_or_throw(std::size_t n, std::size_t align) {
  for (;;) {
    if (void* p = counted_alloc(n, align)) return p;
    std::new_handler h = std::get_new_handler();
    if (h == nullptr) throw std::bad_alloc();
    h();
  }
}

struct Marker {
  Marker() { pip::alloc::detail::mark_hook_installed(); }
} marker;

}  // namespace

void* operator new(std::size_t n) { return alloc_or_throw(n, kHeader); }
void* operator new[](std::size_t n) { return alloc_or_throw(n, kHeader); }
void* operator new(std::size_t n, const std::nothrow_t&) noexcept {
  return counted_alloc(n, kHeader);
}
void* operator new[](std::size_t n, const std::nothrow_t&) noexcept {
  return counted_alloc(n, kHeader);
}
void* operator new(std::size_t n, std::align_val_t a) {
  return alloc_or_throw(n, static_cast<std::size_t>(a));
}
void* operator new[](std::size_t n, std::align_val_t a) {
  return alloc_or_throw(n, static_cast<std::size_t>(a));
}
void* operator new(std::size_t n, std::align_val_t a, const std::nothrow_t&) noexcept {
  return counted_alloc(n, static_cast<std::size_t>(a));
}
void* operator new[](std::size_t n, std::align_val_t a, const std::nothrow_t&) noexcept {
  return counted_alloc(n, static_cast<std::size_t>(a));
}

void operator delete(void* p) noexcept { counted_free(p); }
void operator delete[](void* p) noexcept { counted_free(p); }
void operator delete(void* p, std::size_t) noexcept { counted_free(p); }
void operator delete[](void* p, std::size_t) noexcept { counted_free(p); }
void operator delete(void* p, const std::nothrow_t&) noexcept { counted_free(p); }
void operator delete[](void* p, const std::nothrow_t&) noexcept { counted_free(p); }
void operator delete(void* p, std::align_val_t) noexcept { counted_free(p); }
void operator delete[](void* p, std::align_val_t) noexcept { counted_free(p); }
void operator delete(void* p, std::size_t, std::align_val_t) noexcept { counted_free(p); }
void operator delete[](void* p, std::size_t, std::align_val_t) noexcept { counted_free(p); }
void operator delete(void* p, std::align_val_t, const std::nothrow_t&) noexcept {
  counted_free(p);
}
void operator delete[](void* p, std::align_val_t, const std::nothrow_t&) noexcept {
  counted_free(p);
}
