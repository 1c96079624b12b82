#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "pip/alloc_stats.hpp"
#include "pip/encoding.hpp"
#include "pip/reference.hpp"
#include "pip/shuffle.hpp"
#include "support.hpp"

using namespace pip;
using namespace pip::shuffle;

namespace {

std::vector<word> iota_keys(std::size_t n, word start = 1) {
  std::vector<word> v(n);
  std::iota(v.begin(), v.end(), start);
  return v;
}

std::vector<std::size_t> random_targets(rng::SplitMix& g, std::size_t n) {
  std::vector<std::size_t> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = g.below(i + 1);
  return h;
}

std::vector<word> replay(std::vector<word> a, const std::vector<std::size_t>& h,
                         std::size_t lo, std::size_t hi) {
  if (hi <= lo) return a;
  std::vector<std::uint64_t> hh(h.begin(), h.end());
  ref::ref_knuth_apply(a, hh, lo, hi - 1);
  return a;
}

// Rank of the permutation of keys 1..n held in a.
std::uint64_t rank_of(const std::vector<word>& a) {
  std::vector<unsigned> pi(a.begin(), a.end());
  return enc::perm_rank(pi);
}

template <class F>
double uniformity_p(std::size_t n, std::uint64_t samples, F&& run) {
  std::vector<std::uint64_t> counts(enc::PermUnit(unsigned(n)).factorial(unsigned(n)), 0);
  for (std::uint64_t s = 0; s < samples; ++s) {
    auto a = iota_keys(n);
    run(a, s);
    ++counts[rank_of(a)];
  }
  return chi_square_uniform_p(counts);
}

BufferedParams tiny() {
  BufferedParams p;
  p.chunk = 1;
  p.word_bits = 1;
  p.stage1_aux = 1;
  p.stage2_aux = 1;
  p.heap_workspace = true;
  return p;
}

}  // namespace

TEST_CASE("targets lie in [0, i] and are pure") {
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(target(7, i) <= i);
    CHECK(target(7, i) == target(7, i));
  }
  CHECK(target(1, 0) == 0);
}

TEST_CASE("single element is identity") {
  std::vector<word> a{42};
  parallel_knuth_shuffle(a, 0, 1, 3);
  chunked_shuffle(a, 1, 3);
  buffered_shuffle(a, 3);
  CHECK(a == std::vector<word>{42});
}

TEST_CASE("parallel and chunked replay the sequential shuffle") {
  rng::SplitMix g(11);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = 1 + g.below(1000);
    const auto h = random_targets(g, n);
    const auto a = iota_keys(n);
    const auto want = replay(a, h, 0, n);
    auto x = a;
    parallel_knuth_shuffle(x, 0, n, h);
    CHECK(x == want);
    auto y = a;
    chunked_shuffle(y, 1 + g.below(n), h);
    CHECK(y == want);
    const std::size_t lo = g.below(n), hi = lo + g.below(n - lo + 1);
    auto z = a;
    parallel_knuth_shuffle(z, lo, hi, h);
    CHECK(z == replay(a, h, lo, hi));
  }
}

TEST_CASE("seeded variants agree with replay of the seeded targets") {
  const std::size_t n = 5000;
  std::vector<std::size_t> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = target(99, i);
  const auto want = replay(iota_keys(n), h, 0, n);
  auto x = iota_keys(n);
  parallel_knuth_shuffle(x, 0, n, 99);
  CHECK(x == want);
  for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{77}, n}) {
    auto y = iota_keys(n);
    chunked_shuffle(y, k, 99);
    CHECK(y == want);
  }
}

TEST_CASE("narrow masked workspace keeps high bits intact") {
  const std::size_t n = 3000, k = 50;
  const unsigned bits = min_workspace_bits(n) + 1;
  std::vector<word> cells(workspace_words(k, 2));
  rng::SplitMix g(3);
  for (auto& c : cells) c = g.next();
  const auto before = cells;
  auto a = iota_keys(n);
  chunked_shuffle(a, k, 5, buf::MaskedWords(cells.data(), cells.size(), bits));
  auto b = iota_keys(n);
  chunked_shuffle(b, k, 5);
  CHECK(a == b);
  const word mask = (word{1} << bits) - 1;
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK((cells[i] & ~mask) == (before[i] & ~mask));
}

TEST_CASE("buffered shuffle preserves the multiset") {
  rng::SplitMix g(13);
  for (int iter = 0; iter < 60; ++iter) {
    const std::size_t n = iter < 50 ? 1 + g.below(20000) : 100000 + g.below(400000);
    auto a = testsupport::distinct_sorted(g, n);
    std::shuffle(a.begin(), a.end(), g);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    const auto st = buffered_shuffle(a, g.next());
    if (n > 200000) CHECK_FALSE(st.fallback);
    std::sort(a.begin(), a.end());
    CHECK(a == sorted);
  }
}

TEST_CASE("buffered shuffle runs both stages with in-array workspace") {
  rng::SplitMix g(17);
  auto a = testsupport::distinct_sorted(g, 1 << 20);
  const auto sorted = a;
  alloc::Window w;
  const auto st = buffered_shuffle(a, 1);
  CHECK_FALSE(st.fallback);
  CHECK(st.stage1_cells > 0);
  CHECK(st.stage2_cells > 0);
  CHECK(st.stage1_cells <= a.size() / 8);
  CHECK(st.stage2_cells <= a.size() / 8);
  CHECK(w.heap_peak_delta() < a.size() * sizeof(word) / 100);
  CHECK(a != sorted);
  std::sort(a.begin(), a.end());
  CHECK(a == sorted);
}

TEST_CASE("buffered shuffle with tiny parameters is uniform at n = 6") {
  const auto p = tiny();
  const double pv = uniformity_p(6, 120 * 720, [&](std::vector<word>& a, std::uint64_t s) {
    const auto st = buffered_shuffle(a, s, p);
    REQUIRE_FALSE(st.fallback);
  });
  CHECK(pv > 1e-3);
}

TEST_CASE("parallel and chunked are uniform at n = 5") {
  CHECK(uniformity_p(5, 120 * 120, [](std::vector<word>& a, std::uint64_t s) {
          parallel_knuth_shuffle(a, 1, a.size(), s);
        }) > 1e-3);
  CHECK(uniformity_p(5, 120 * 120, [](std::vector<word>& a, std::uint64_t s) {
          chunked_shuffle(a, 2, s);
        }) > 1e-3);
}

TEST_CASE("uniform encoder") {
  std::vector<word> a{1, 2, 3, 4};
  uniform_encoder_apply(a, {}, 1);
  CHECK(a == std::vector<word>{1, 2, 3, 4});
  CHECK_THROWS_AS(uniform_encoder_apply(a, {{0, 1}, {1, 2}}, 1), ContractViolation);
  CHECK_THROWS_AS(uniform_encoder_apply(a, {{0, 9}}, 1), ContractViolation);
  std::size_t flipped = 0;
  const std::size_t runs = 100000;
  for (std::size_t s = 0; s < runs; ++s) {
    std::vector<word> b{1, 2};
    uniform_encoder_apply(b, {{0, 1}}, s);
    flipped += b[0] == 2;
  }
  CHECK(std::abs(double(flipped) / runs - 0.5) < 0.01);
}

TEST_CASE("encoder composed with an independent encoder has the encoder law") {
  const shuffle::EncoderSpec spec{{0, 1}, {2, 3}, {4, 5}, {6, 7}};
  std::vector<std::uint64_t> once(16, 0), twice(16, 0);
  auto code = [](const std::vector<word>& a) {
    unsigned c = 0;
    for (unsigned q = 0; q < 4; ++q) c |= unsigned(a[2 * q] > a[2 * q + 1]) << q;
    return c;
  };
  const std::size_t runs = 100000;
  for (std::size_t s = 0; s < runs; ++s) {
    auto a = iota_keys(8);
    uniform_encoder_apply(a, spec, 2 * s);
    ++once[code(a)];
    auto b = iota_keys(8);
    uniform_encoder_apply(b, spec, 2 * s + 1);
    uniform_encoder_apply(b, spec, rng::mix(s) | 1);
    ++twice[code(b)];
  }
  CHECK(chi_square_uniform_p(once) > 1e-3);
  CHECK(chi_square_uniform_p(twice) > 1e-3);
}

TEST_CASE("chi-square helper") {
  std::vector<std::uint64_t> flat(10, 1000);
  CHECK(chi_square_uniform_p(flat) == doctest::Approx(1.0));
  std::vector<std::uint64_t> skew{2000, 0, 1000, 1000};
  CHECK(chi_square_uniform_p(skew) < 1e-6);
}
