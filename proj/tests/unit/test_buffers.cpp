#include <algorithm>
#include <vector>

#include "doctest.h"
#include "pip/buffers.hpp"
#include "pip/encoding.hpp"
#include "pip/random.hpp"

using namespace pip;
using namespace pip::buf;

namespace {

std::vector<word> distinct(rng::SplitMix& g, std::size_t n) {
  std::vector<word> v(n);
  word x = g.next() >> 8;
  for (auto& e : v) e = (x += 1 + g.below(1 << 20));
  std::shuffle(v.begin(), v.end(), g);
  return v;
}

// Canonical form: the same array with every encoding pair ascending.
std::vector<word> canonical(std::vector<word> v, const RestorableBuffer& b) {
  for (std::size_t c = b.enc_start(); c < b.end(); c += 2)
    if (v[c] > v[c + 1]) std::swap(v[c], v[c + 1]);
  return v;
}

}  // namespace

TEST_CASE("init encodes low bits") {
  std::vector<word> a{8, 3, 2, 5, 4};
  buffer_init(a, RestorableBuffer{0, 1, 2, false});
  CHECK(a[1] < a[2]);
  CHECK(a[3] < a[4]);
  std::vector<word> c{7, 1, 2};
  buffer_init(c, RestorableBuffer{0, 1, 1, false});
  CHECK(c[1] > c[2]);
}

TEST_CASE("init then restore is identity up to pair canonicalisation") {
  rng::SplitMix g(5);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t s = 1 + g.below(8);
    const unsigned w = 1 + unsigned(g.below(64));
    const std::size_t lead = g.below(5);
    RestorableBuffer b{lead, s, w, g.below(2) == 1};
    auto a = distinct(g, b.end() + g.below(5));
    a = canonical(a, b);
    const auto orig = a;
    buffer_init(a, b);
    for (std::size_t t = 0; t < s; ++t) a[lead + t] = g.next();
    // Plain buffers only promise the low bits; keep the high bits for the
    // bit-exact comparison.
    for (std::size_t t = 0; t < s; ++t)
      a[lead + t] = (a[lead + t] & b.low_mask()) | (orig[lead + t] & ~b.low_mask());
    buffer_restore(a, b);
    CHECK(a == orig);
  }
}

TEST_CASE("simulated reads and writes") {
  rng::SplitMix g(9);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t s = 1 + g.below(6);
    const unsigned w = 1 + unsigned(g.below(64));
    RestorableBuffer b{0, s, w, true};
    auto a = distinct(g, b.end());
    const auto orig = a;
    buffer_init(a, b);
    for (std::size_t t = 0; t < s; ++t) CHECK(simulated_read(a, b, t) == orig[t]);
    std::vector<word> want(orig.begin(), orig.begin() + s);
    for (int k = 0; k < 20; ++k) {
      const std::size_t t = g.below(s);
      want[t] = g.next();
      simulated_write(a, b, t, want[t]);
      // Workspace traffic in the low bits must not disturb simulated values.
      a[g.below(s)] ^= g.next() & b.low_mask();
      CHECK(simulated_read(a, b, t) == want[t]);
    }
    buffer_restore(a, b);
    for (std::size_t t = 0; t < s; ++t) CHECK(a[t] == want[t]);
  }
  std::vector<word> a{1, 2, 3};
  CHECK_THROWS_AS(simulated_read(a, RestorableBuffer{0, 1, 1, false}, 0),
                  ContractViolation);
}

TEST_CASE("encoding writes preserve encoded bits") {
  rng::SplitMix g(13);
  const std::size_t s = 3;
  const unsigned w = 16;
  RestorableBuffer b{0, s, w, true};
  auto a = distinct(g, b.end());
  buffer_init(a, b);
  std::vector<std::uint64_t> bits(s);
  for (std::size_t t = 0; t < s; ++t)
    bits[t] = enc::read_pairs(a.data() + b.enc_start() + 2 * w * t, w);
  word fresh = ~word{0} >> 1;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t cell = b.enc_start() + g.below(b.enc_len());
    encoding_write(a, b, cell, fresh--);
  }
  for (std::size_t t = 0; t < s; ++t)
    CHECK(enc::read_pairs(a.data() + b.enc_start() + 2 * w * t, w) == bits[t]);
  const std::size_t c = b.enc_start();
  CHECK_THROWS_AS(encoding_write(a, b, c, a[c + 1]), ContractViolation);
}

TEST_CASE("adjustable buffer interleaves simulated and encoding writes") {
  rng::SplitMix g(17);
  RestorableBuffer d{0, 4, 12, true};
  auto a = distinct(g, d.end());
  AdjustableBuffer ab(a, d);
  ab.init();
  std::vector<word> want(a.begin(), a.begin() + 4);
  word fresh = ~word{0} >> 2;
  for (int k = 0; k < 1000; ++k) {
    if (g.below(2)) {
      const std::size_t t = g.below(4);
      want[t] = g.next();
      ab.write(t, want[t]);
    } else {
      ab.encoding_write(d.enc_start() + g.below(d.enc_len()), fresh--);
    }
    const std::size_t t = g.below(4);
    CHECK(ab.read(t) == want[t]);
  }
  ab.restore();
  for (std::size_t t = 0; t < 4; ++t) CHECK(a[t] == want[t]);
  CHECK(ab.violations() == 0);
}

TEST_CASE("masked words keep high bits") {
  std::vector<word> cells{0xAB00000000000000ull, 0xCD00000000000000ull};
  MaskedWords m(cells.data(), 2, 20);
  m.store(0, 0x12345);
  CHECK(m.load(0) == 0x12345);
  CHECK((cells[0] >> 56) == 0xAB);
  word exp = 0;
  CHECK(m.compare_exchange(1, exp, 7));
  CHECK(m.load(1) == 7);
  exp = 3;
  CHECK_FALSE(m.compare_exchange(1, exp, 9));
  CHECK(exp == 7);
}
