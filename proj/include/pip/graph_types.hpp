#pragma once

#include <algorithm>
#include <cstdint>
#include <tuple>

namespace pip::graph {

using vertex = std::uint64_t;  // labels 1..n
using weight = std::uint64_t;

struct Edge {
  vertex u = 0;
  vertex v = 0;
  weight w = 0;
};

// Total order on edges: (weight, min endpoint, max endpoint).
struct EdgeKey {
  weight w = 0;
  vertex lo = 0;
  vertex hi = 0;

  EdgeKey() = default;
  EdgeKey(vertex a, vertex b, weight wt)
      : w(wt), lo(std::min(a, b)), hi(std::max(a, b)) {}
  explicit EdgeKey(const Edge& e) : EdgeKey(e.u, e.v, e.w) {}

  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  friend bool operator<(const EdgeKey& a, const EdgeKey& b) {
    return std::tie(a.w, a.lo, a.hi) < std::tie(b.w, b.lo, b.hi);
  }
  friend bool operator>(const EdgeKey& a, const EdgeKey& b) { return b < a; }
  friend bool operator<=(const EdgeKey& a, const EdgeKey& b) { return !(b < a); }
  friend bool operator>=(const EdgeKey& a, const EdgeKey& b) { return !(a < b); }
};

}  // namespace pip::graph
