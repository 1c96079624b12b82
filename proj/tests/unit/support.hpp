#pragma once

#include <algorithm>
#include <vector>

#include "pip/core.hpp"
#include "pip/random.hpp"

namespace testsupport {

// n distinct keys in [lo, hi), ascending.
inline std::vector<pip::word> distinct_sorted(pip::rng::SplitMix& g,
                                              std::size_t n,
                                              pip::word lo = 1 << 20,
                                              pip::word hi = pip::word{1} << 62) {
  std::vector<pip::word> v(n);
  const pip::word step = (hi - lo) / (n + 1);
  pip::word x = lo;
  for (auto& e : v) e = (x += 1 + g.below(std::max<pip::word>(1, 2 * step - 1)));
  return v;
}

// Two sorted runs with a random interleaving of their union.
inline void sorted_pair(pip::rng::SplitMix& g, std::size_t na, std::size_t nb,
                        std::vector<pip::word>& a, std::vector<pip::word>& b) {
  const auto all = distinct_sorted(g, na + nb);
  a.clear();
  b.clear();
  std::size_t ra = na, rb = nb;
  for (pip::word x : all) {
    if (g.below(ra + rb) < ra) {
      a.push_back(x);
      --ra;
    } else {
      b.push_back(x);
      --rb;
    }
  }
}

}  // namespace testsupport
