#pragma once

#include <cstddef>
#include <new>
#include <type_traits>

// Task-local scratch. Each worker thread keeps one malloc-backed arena that
// leases out stack-ordered slices; slices are counted as scratch, not heap.
// A lease must not be held across a fork (TBB may run another task on the
// same thread while waiting).
namespace pip::scratch {

namespace detail {
void* acquire(std::size_t bytes, bool& dedicated);
void release(void* p, std::size_t bytes, bool dedicated);
}  // namespace detail

template <class T>
class Lease {
  static_assert(std::is_trivially_copyable_v<T>);

 public:
  explicit Lease(std::size_t count) : count_(count) {
    bytes_ = (count * sizeof(T) + 63) & ~std::size_t{63};
    data_ = static_cast<T*>(detail::acquire(bytes_, dedicated_));
  }
  ~Lease() { detail::release(data_, bytes_, dedicated_); }
  Lease(const Lease&) = delete;
  Lease& operator=(const Lease&) = delete;

  T* data() { return data_; }
  std::size_t size() const { return count_; }
  T& operator[](std::size_t i) { return data_[i]; }

 private:
  T* data_ = nullptr;
  std::size_t count_ = 0;
  std::size_t bytes_ = 0;
  bool dedicated_ = false;
};

}  // namespace pip::scratch
