#include <algorithm>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "pip/alloc_stats.hpp"
#include "pip/merge.hpp"
#include "pip/reference.hpp"
#include "support.hpp"

using namespace pip;
using namespace pip::merge;

namespace {

struct Instance {
  std::vector<word> data;
  std::size_t na = 0;
  std::size_t b = 0;
  AlignmentPlan plan;
  Layout layout;

  Blocks blocks() { return Blocks(data.data(), plan, b, nullptr, nullptr); }
};

Instance block_instance(rng::SplitMix& g, std::size_t a_blocks,
                        std::size_t b_blocks, const Options& opts,
                        std::size_t b = 0) {
  Instance in;
  std::vector<word> a, bb;
  if (b == 0) b = default_block_size((a_blocks + b_blocks) * 64, opts);
  testsupport::sorted_pair(g, a_blocks * b, b_blocks * b, a, bb);
  in.data = a;
  in.data.insert(in.data.end(), bb.begin(), bb.end());
  in.na = a.size();
  in.b = b;
  in.plan = align_inputs(a.size(), bb.size(), b);
  in.layout = Layout::make(b, in.plan.blocks(), opts);
  return in;
}

std::vector<std::vector<word>> block_multisets(const Blocks& x) {
  std::vector<std::vector<word>> out;
  for (std::size_t i = 0; i < x.count(); ++i) {
    std::vector<word> blk(x[i], x[i] + x.b());
    std::sort(blk.begin(), blk.end());
    out.push_back(blk);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<word> run_merge(std::vector<word> a, const std::vector<word>& b,
                            const Options& opts = {}) {
  const std::size_t na = a.size();
  a.insert(a.end(), b.begin(), b.end());
  merge::merge(a, na, opts);
  return a;
}

}  // namespace

TEST_CASE("merge examples") {
  CHECK(run_merge({1, 3, 5}, {2, 4, 6}) == std::vector<word>{1, 2, 3, 4, 5, 6});
  CHECK(run_merge({1, 3, 5}, {}) == std::vector<word>{1, 3, 5});
  CHECK(run_merge({}, {2, 4}) == std::vector<word>{2, 4});
}

TEST_CASE("alignment plan") {
  const auto p = align_inputs(64, 128, 32);
  CHECK(p.empty());
  CHECK(p.blocks() == 6);
  const auto q = align_inputs(35, 33, 32);
  CHECK(q.pad_lo == 29);
  CHECK(q.head == 3);
  CHECK(q.pad_hi == 31);
  CHECK(q.tail == 1);
  CHECK(q.blocks() == 4);
}

TEST_CASE("layout budget") {
  const Options opts;
  const Layout l = Layout::make(default_block_size(1000, opts), 20, opts);
  CHECK(l.s % 2 == 0);
  CHECK(l.s == 6 * l.fw + 2);
  CHECK(l.right_pairs_end == l.s + 2 * (l.fw + 2));
  CHECK(l.right_pairs_end < l.b);
  CHECK_THROWS_AS(Layout::make(8 * l.fw + 6, 20, opts), ContractViolation);
  CHECK_NOTHROW(Layout::make(8 * l.fw + 7, 20, opts));
}

TEST_CASE("metadata: T matches sort by endpoint, inv matches definition") {
  rng::SplitMix g(21);
  const Options opts;
  for (int iter = 0; iter < 50; ++iter) {
    auto in = block_instance(g, 8, 8, opts);
    auto x = in.blocks();
    std::vector<std::pair<word, std::size_t>> ends;
    for (std::size_t i = 0; i < x.count(); ++i) ends.emplace_back(x.endpoint(i), i);
    std::vector<std::size_t> pos(x.count());
    auto sorted = ends;
    std::stable_sort(sorted.begin(), sorted.end());
    for (std::size_t p = 0; p < sorted.size(); ++p) pos[sorted[p].second] = p;
    compute_block_metadata(x, in.layout, opts);
    for (std::size_t i = 0; i < x.count(); ++i) {
      CHECK(in.layout.T.read(x[i]) == pos[i]);
      // Opposite block with the smallest endpoint above ours.
      const bool in_a = i < x.a_blocks();
      std::size_t want = in.layout.none();
      word best = ~word{0};
      for (std::size_t j = 0; j < x.count(); ++j)
        if ((j < x.a_blocks()) != in_a && x.endpoint(j) > x.endpoint(i) &&
            x.endpoint(j) < best) {
          best = x.endpoint(j);
          want = pos[j];
        }
      CHECK(in.layout.inv.read(x[i]) == want);
    }
  }
}

TEST_CASE("end_merge: already end-sorted needs no rounds") {
  const Options opts;
  const std::size_t b = default_block_size(1 << 10, opts);
  std::vector<word> data(4 * b);
  std::iota(data.begin(), data.end(), word{100});
  const auto plan = align_inputs(2 * b, 2 * b, b);
  const Layout l = Layout::make(b, plan.blocks(), opts);
  Blocks x(data.data(), plan, b, nullptr, nullptr);
  compute_block_metadata(x, l, opts);
  std::atomic<word> flag{0};
  CHECK(done(x, l, flag));
  CHECK(end_merge(x, l, opts) == 0);
}

TEST_CASE("end_merge: two-cycle") {
  const Options opts;
  const std::size_t b = default_block_size(1 << 10, opts);
  std::vector<word> data(2 * b);
  std::iota(data.begin(), data.begin() + b, word{1000 + b});
  std::iota(data.begin() + b, data.end(), word{1000});
  const auto plan = align_inputs(b, b, b);
  const Layout l = Layout::make(b, 2, opts);
  Blocks x(data.data(), plan, b, nullptr, nullptr);
  compute_block_metadata(x, l, opts);
  CHECK(l.T.read(x[0]) == 1);
  CHECK(l.T.read(x[1]) == 0);
  end_merge(x, l, opts);
  CHECK(x.endpoint(0) < x.endpoint(1));
  seq_sort(x, l, 0, 2);
  CHECK(std::is_sorted(data.begin(), data.end()));
}

TEST_CASE("end_merge end-sorts and keeps block multisets, all option combos") {
  rng::SplitMix g(33);
  for (int mask = 0; mask < 8; ++mask) {
    Options opts;
    opts.seed = 5 + mask;
    opts.precomputed_coins = mask & 1;
    opts.round_cap = mask & 2;
    opts.cache_target = mask & 4;
    for (int iter = 0; iter < 10; ++iter) {
      auto in = block_instance(g, 1 + g.below(40), 1 + g.below(40), opts);
      auto x = in.blocks();
      const auto before = block_multisets(x);
      compute_block_metadata(x, in.layout, opts);
      Stats st;
      end_merge(x, in.layout, opts, &st);
      for (std::size_t i = 1; i < x.count(); ++i)
        CHECK(x.endpoint(i - 1) < x.endpoint(i));
      CHECK(block_multisets(x) == before);
      for (std::size_t i = 0; i < x.count(); ++i) CHECK(in.layout.D.read(x[i]) == 1);
      if (opts.round_cap)
        CHECK(st.rounds <= 3 * std::max<std::size_t>(1, std::bit_width(x.count() - 1)));
      seq_sort(x, in.layout, 0, x.count());
      CHECK(std::is_sorted(in.data.begin(), in.data.end()));
    }
  }
}

TEST_CASE("inversions after end_merge only with the clamped inversion index") {
  rng::SplitMix g(41);
  const Options opts;
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t na = 1 + g.below(32), nb = 1 + g.below(32);
    auto in = block_instance(g, na, nb, opts);
    auto x = in.blocks();
    compute_block_metadata(x, in.layout, opts);
    end_merge(x, in.layout, opts);
    const std::size_t n = x.count();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t partner = std::min(n - 1, std::size_t(in.layout.inv.read(x[i])));
      for (std::size_t j = i + 1; j < n; ++j) {
        const word mn = *std::min_element(x[j], x[j] + in.b);
        if (x.endpoint(i) > mn) CHECK(j == partner);
      }
    }
  }
}

TEST_CASE("separate splits the slice at its midpoint") {
  rng::SplitMix g(43);
  const Options opts;
  for (int iter = 0; iter < 100; ++iter) {
    auto in = block_instance(g, 1 + g.below(10), 1 + g.below(10), opts);
    auto x = in.blocks();
    compute_block_metadata(x, in.layout, opts);
    end_merge(x, in.layout, opts);
    const std::size_t n = x.count();
    if (n < 2) continue;
    separate(x, in.layout, 0, n);
    const std::size_t mid = n / 2;
    word left_max = 0, right_min = ~word{0};
    for (std::size_t i = 0; i < mid; ++i)
      left_max = std::max(left_max, *std::max_element(x[i], x[i] + in.b));
    for (std::size_t i = mid; i < n; ++i)
      right_min = std::min(right_min, *std::min_element(x[i], x[i] + in.b));
    CHECK(left_max < right_min);
  }
}

TEST_CASE("seq_sort of a single block resets its encoding") {
  rng::SplitMix g(45);
  const Options opts;
  auto in = block_instance(g, 1, 1, opts);
  auto x = in.blocks();
  compute_block_metadata(x, in.layout, opts);
  in.layout.T.write(x[0], 1);
  seq_sort(x, in.layout, 0, 1);
  CHECK(std::is_sorted(x[0], x[0] + in.b));
}

TEST_CASE("merge matches ref_merge across sizes and options") {
  rng::SplitMix g(51);
  for (int iter = 0; iter < 300; ++iter) {
    Options opts;
    opts.seed = g.next();
    opts.precomputed_coins = g.below(2);
    opts.round_cap = g.below(2);
    opts.cache_target = g.below(2);
    opts.verify = true;
    const std::size_t na = g.below(iter < 150 ? 400 : 20000);
    const std::size_t nb = g.below(iter < 150 ? 400 : 20000);
    std::vector<word> a, b;
    testsupport::sorted_pair(g, na, nb, a, b);
    CHECK(run_merge(a, b, opts) == ref::ref_merge(a, b));
  }
}

TEST_CASE("merge with padding on both sides and block override") {
  rng::SplitMix g(52);
  const Options def;
  const std::size_t b = default_block_size(3000, def);
  std::vector<word> a, c;
  testsupport::sorted_pair(g, b + 3, b + 1, a, c);
  CHECK(run_merge(a, c) == ref::ref_merge(a, c));
  Options big;
  big.block_size = 4000;
  testsupport::sorted_pair(g, 30001, 17003, a, c);
  CHECK(run_merge(a, c, big) == ref::ref_merge(a, c));
  Options tiny;
  tiny.block_size = 20;
  CHECK_THROWS_AS(run_merge(a, c, tiny), ContractViolation);
}

TEST_CASE("merge rejects reserved sentinel keys and duplicates") {
  const Options opts;
  const std::size_t b = default_block_size(1000, opts);
  std::vector<word> data(1000);
  std::iota(data.begin(), data.end(), 0);
  // Interleave: evens left, odds right.
  std::vector<word> a, c;
  for (word x : data) (x % 2 ? c : a).push_back(x);
  REQUIRE(a.size() % b != 0);
  CHECK_THROWS_AS(run_merge(a, c), ContractViolation);
  Options v;
  v.verify = true;
  std::vector<word> d{1 << 21, 1 << 22};
  std::vector<word> e{1 << 21};
  CHECK_THROWS_AS(run_merge(d, e, v), ContractViolation);
}

TEST_CASE("merge heap use is bounded by the block size") {
  rng::SplitMix g(53);
  for (int iter = 0; iter < 20; ++iter) {
    const std::size_t na = g.below(50000), nb = g.below(50000);
    std::vector<word> a, b;
    testsupport::sorted_pair(g, na, nb, a, b);
    a.insert(a.end(), b.begin(), b.end());
    const Options opts;
    alloc::Window w;
    const Stats st = merge::merge(a, na, opts);
    CHECK(w.heap_peak_delta() <= (4 * st.block_size + 16) * sizeof(word));
    CHECK(std::is_sorted(a.begin(), a.end()));
  }
}
