#include "pip/merge.hpp"

#include <algorithm>
#include <bit>
#include <memory>
#include <vector>

#include "pip/buffers.hpp"
#include "pip/parallel.hpp"
#include "pip/random.hpp"
#include "pip/scratch.hpp"

namespace pip::merge {
namespace {

constexpr std::size_t kBlockGrain = 256;
// Below this many cells seq_sort recursion stays on one thread.
constexpr std::size_t kSortSequentialCells = 1 << 14;

std::size_t ceil_log2(std::size_t x) {
  return x <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(x - 1));
}

word low_mask(unsigned bits) {
  return bits >= 64 ? ~word{0} : (word{1} << bits) - 1;
}

buf::RestorableBuffer target_cache(const Layout& l) {
  return buf::RestorableBuffer{0, 1, l.fw, false};
}

std::size_t target_of(const Blocks& x, const Layout& l, std::size_t i) {
  if (l.cache_target) return x[i][0] & low_mask(l.fw);
  return l.T.read(x[i]);
}

void swap_cells(word* a, word* b, std::size_t lo, std::size_t hi) {
  std::swap_ranges(a + lo, a + hi, b + lo);
}

bool coin_for(const Blocks& x, const Layout& l, const Options& opts,
              std::size_t i, std::size_t round) {
  if (l.precomputed_coins && round <= 32)
    return (l.coins.read(x[i]) >> (round - 1)) & 1u;
  return rng::coin(opts.seed, rng::Stream::merge_coin, i, round);
}

// Positions form disjoint cycles under i -> T(block at i). The smallest
// position of each cycle is marked (E = 1) in parallel, then each marked
// leader rotates its cycle. The rotation pass is a sequential scan: a reader
// of any block in a cycle would race with that cycle's rotation.
std::size_t cycle_leader_complete(const Blocks& x, const Layout& l) {
  const std::size_t n = x.count();
  par::for_each(0, n, kBlockGrain, [&](std::size_t i) {
    if (l.D.read(x[i])) return;
    for (std::size_t j = target_of(x, l, i); j != i; j = target_of(x, l, j))
      if (j < i) return;
    l.E.write(x[i], 1);
  });
  std::size_t placed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (l.D.read(x[i]) || !l.E.read(x[i])) continue;
    l.E.write(x[i], 0);
    for (std::size_t t = target_of(x, l, i); t != i; t = target_of(x, l, i)) {
      swap_cells(x[i], x[t], 0, l.b);
      l.D.write(x[t], 1);
      ++placed;
    }
    l.D.write(x[i], 1);
    ++placed;
  }
  return placed;
}

}  // namespace

std::size_t default_block_size(std::size_t total, const Options& opts) {
  const std::size_t w = std::max<std::size_t>(1, std::bit_width(total));
  std::size_t b = 8 * w + 8;
  if (opts.precomputed_coins) b += 64;
  if (opts.cache_target) b += 2 * w + 1;
  return b + (b & 1);
}

Layout Layout::make(std::size_t block_size, std::size_t blocks,
                    const Options& opts) {
  Layout l;
  l.b = block_size;
  l.blocks = blocks;
  l.fw = std::max<unsigned>(1, std::bit_width(blocks));
  l.cache_target = opts.cache_target;
  l.precomputed_coins = opts.precomputed_coins;
  const std::size_t left_raw = opts.cache_target ? 1 + 2 * std::size_t{l.fw} : 0;
  const std::vector<std::pair<std::string, unsigned>> left_fields = {
      {"inv", l.fw}, {"R", l.fw}, {"I", l.fw}, {"E", 1}};
  std::vector<std::pair<std::string, unsigned>> right_fields = {
      {"T", l.fw}, {"C", 1}, {"D", 1}};
  if (opts.precomputed_coins) right_fields.emplace_back("coins", 32);
  l.s = enc::BlockLayout::required_cells(left_raw, left_fields);
  const std::size_t need =
      enc::BlockLayout::required_cells(l.s, right_fields) + 1;
  require(block_size >= need,
          "block size " + std::to_string(block_size) + " below minimum " +
              std::to_string(need) + " for " + std::to_string(blocks) +
              " blocks");
  l.left = enc::BlockLayout(l.s, left_raw, left_fields);
  l.right = enc::BlockLayout(block_size - 1, l.s, right_fields);
  l.inv = l.left.field("inv");
  l.R = l.left.field("R");
  l.I = l.left.field("I");
  l.E = l.left.field("E");
  l.T = l.right.field("T");
  l.C = l.right.field("C");
  l.D = l.right.field("D");
  if (opts.precomputed_coins) l.coins = l.right.field("coins");
  l.left_pairs_begin = opts.cache_target ? 1 : 0;
  l.right_pairs_end = l.right.used_cells();
  return l;
}

AlignmentPlan align_inputs(std::size_t na, std::size_t nb, std::size_t b) {
  require(b >= 2, "block size must be at least 2");
  AlignmentPlan p;
  p.head = na % b;
  p.pad_lo = p.head == 0 ? 0 : b - p.head;
  p.tail = nb % b;
  p.pad_hi = p.tail == 0 ? 0 : b - p.tail;
  p.a_blocks = (na + b - 1) / b;
  p.b_blocks = (nb + b - 1) / b;
  return p;
}

void compute_block_metadata(const Blocks& x, const Layout& l,
                            const Options& opts) {
  const std::size_t na = x.a_blocks();
  const std::size_t n = x.count();
  const std::size_t nb = n - na;
  // Number of blocks in [first, first + count) whose endpoint is below e.
  auto rank = [&](std::size_t first, std::size_t count, word e) {
    std::size_t lo = 0, hi = count;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (x.endpoint(first + mid) < e) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  };
  par::for_each(0, n, kBlockGrain, [&](std::size_t i) {
    const word e = x.endpoint(i);
    const bool in_a = i < na;
    const std::size_t r = in_a ? rank(na, nb, e) : rank(0, na, e);
    const std::size_t t = in_a ? i + r : (i - na) + r;
    word* blk = x[i];
    l.R.write(blk, r);
    l.I.write(blk, 0);
    l.E.write(blk, 0);
    l.T.write(blk, t);
    l.C.write(blk, 0);
    l.D.write(blk, t == i);
    if (l.precomputed_coins)
      l.coins.write(blk, rng::hash(opts.seed, rng::Stream::merge_coin_word, i) &
                             0xffffffffu);
  });
  par::for_each(0, n, kBlockGrain, [&](std::size_t i) {
    word* blk = x[i];
    const std::size_t r = l.R.read(blk);
    std::size_t inv = l.none();
    if (i < na) {
      if (r < nb) inv = l.T.read(x[na + r]);
    } else if (r < na) {
      inv = l.T.read(x[r]);
    }
    l.inv.write(blk, inv);
  });
  if (l.cache_target) {
    const buf::RestorableBuffer cache = target_cache(l);
    const word mask = low_mask(l.fw);
    par::for_each(0, n, kBlockGrain, [&](std::size_t i) {
      word* blk = x[i];
      const std::span<word> cells(blk, l.s);
      buf::buffer_init(cells, cache);
      blk[0] = (blk[0] & ~mask) | l.T.read(blk);
    });
  }
}

bool done(const Blocks& x, const Layout& l, std::atomic<word>& flag) {
  flag.store(1, std::memory_order_relaxed);
  par::for_each(0, x.count(), kBlockGrain, [&](std::size_t i) {
    if (!l.D.read(x[i])) flag.store(0, std::memory_order_relaxed);
  });
  return flag.load(std::memory_order_relaxed) != 0;
}

std::size_t end_merge(const Blocks& x, const Layout& l, const Options& opts,
                      Stats* stats) {
  const std::size_t n = x.count();
  auto flag = std::make_unique<std::atomic<word>>(0);
  const std::size_t cap = 3 * std::max<std::size_t>(1, ceil_log2(n));
  std::size_t rounds = 0;
  while (!done(x, l, *flag)) {
    if (opts.round_cap && rounds >= cap) {
      const std::size_t placed = cycle_leader_complete(x, l);
      if (stats != nullptr) stats->cycle_leader_blocks = placed;
      break;
    }
    ++rounds;
    par::for_each(0, n, kBlockGrain, [&](std::size_t i) {
      word* blk = x[i];
      if (!l.D.read(blk)) l.C.write(blk, coin_for(x, l, opts, i, rounds));
    });
    // Reads right sides, writes left sides.
    par::for_each(0, n, kBlockGrain, [&](std::size_t i) {
      word* blk = x[i];
      if (l.D.read(blk) || !l.C.read(blk)) return;
      const std::size_t t = target_of(x, l, i);
      word* dst = x[t];
      if (l.C.read(dst)) return;
      l.E.write(blk, 1);
      l.I.write(blk, i);
      swap_cells(blk, dst, 0, l.s);
    });
    // Reads left sides, writes right sides (and clears the consumed E).
    par::for_each(0, n, kBlockGrain, [&](std::size_t t) {
      word* blk = x[t];
      if (!l.E.read(blk)) return;
      const std::size_t src = l.I.read(blk);
      word* other = x[src];
      swap_cells(blk, other, l.s, l.b);
      l.D.write(blk, 1);
      l.E.write(blk, 0);
      if (l.T.read(other) == src) l.D.write(other, 1);
    });
  }
  if (l.cache_target) {
    const buf::RestorableBuffer cache = target_cache(l);
    par::for_each(0, n, kBlockGrain, [&](std::size_t i) {
      buf::buffer_restore(std::span<word>(x[i], l.s), cache);
    });
  }
  if (stats != nullptr) stats->rounds = rounds;
  return rounds;
}

void reset_block(const Blocks& x, const Layout& l, std::size_t i) {
  word* blk = x[i];
  enc::reset_pairs(blk + l.left_pairs_begin, (l.s - l.left_pairs_begin) / 2);
  enc::reset_pairs(blk + l.s, (l.right_pairs_end - l.s) / 2);
}

void separate(const Blocks& x, const Layout& l, std::size_t lo,
              std::size_t hi) {
  require(hi - lo >= 2, "separate needs at least two blocks");
  const std::size_t i = lo + (hi - lo) / 2 - 1;
  word* bi = x[i];
  const std::size_t inv_i = l.inv.read(bi);
  const std::size_t j = std::min(hi - 1, inv_i);
  word* bj = x[j];
  const std::size_t inv_j = l.inv.read(bj);
  reset_block(x, l, i);
  reset_block(x, l, j);
  const std::size_t b = l.b;
  {
    scratch::Lease<word> tmp(2 * b);
    std::merge(bi, bi + b, bj, bj + b, tmp.data());
    std::copy(tmp.data(), tmp.data() + b, bi);
    std::copy(tmp.data() + b, tmp.data() + 2 * b, bj);
  }
  l.inv.write(bi, inv_i);
  l.inv.write(bj, inv_j);
}

void seq_sort(const Blocks& x, const Layout& l, std::size_t lo,
              std::size_t hi) {
  if (hi - lo == 1) {
    reset_block(x, l, lo);
    return;
  }
  separate(x, l, lo, hi);
  const std::size_t mid = lo + (hi - lo) / 2;
  par::pair((hi - lo) * l.b > kSortSequentialCells,
            [&] { seq_sort(x, l, lo, mid); }, [&] { seq_sort(x, l, mid, hi); });
}

namespace {

void check_inputs(std::span<const word> data, std::size_t na, bool full) {
  const std::size_t n = data.size();
  for (std::size_t i = 1; full && i < na; ++i)
    require(data[i - 1] < data[i], "left input not strictly increasing");
  for (std::size_t i = na + 1; full && i < n; ++i)
    require(data[i - 1] < data[i], "right input not strictly increasing");
  std::size_t p = 0, q = na;
  while (full && p < na && q < n) {
    require(data[p] != data[q], "duplicate key across inputs");
    if (data[p] < data[q]) ++p;
    else ++q;
  }
}

void check_sentinels(std::span<const word> data, std::size_t na,
                     const AlignmentPlan& plan) {
  const word lo = std::min(data[0], data[na]);
  const word hi = std::max(data[na - 1], data[data.size() - 1]);
  require(plan.pad_lo == 0 || lo >= plan.pad_lo,
          "input contains a reserved low sentinel key");
  require(plan.pad_hi == 0 || hi <= ~word{0} - plan.pad_hi,
          "input contains a reserved high sentinel key");
}

}  // namespace

Stats merge(std::span<word> data, std::size_t left_size, const Options& opts) {
  require(left_size <= data.size(), "left size exceeds data");
  const std::size_t na = left_size;
  const std::size_t nb = data.size() - na;
  Stats stats;
  const std::size_t b = opts.block_size != 0
                            ? opts.block_size
                            : default_block_size(data.size(), opts);
  stats.block_size = b;
  if (na == 0 || nb == 0) return stats;
  check_inputs(data, na, opts.verify);
  if (data.size() < 2 * b) {
    std::inplace_merge(data.begin(), data.begin() + na, data.end());
    return stats;
  }

  const AlignmentPlan plan = align_inputs(na, nb, b);
  check_sentinels(data, na, plan);
  const Layout l = Layout::make(b, plan.blocks(), opts);
  stats.blocks = plan.blocks();

  std::vector<word> lo_buf, hi_buf;
  if (plan.pad_lo != 0) {
    lo_buf.resize(b);
    for (std::size_t k = 0; k < plan.pad_lo; ++k) lo_buf[k] = k;
    std::copy(data.begin(), data.begin() + plan.head,
              lo_buf.begin() + plan.pad_lo);
  }
  if (plan.pad_hi != 0) {
    hi_buf.resize(b);
    std::copy(data.end() - plan.tail, data.end(), hi_buf.begin());
    for (std::size_t k = 0; k < plan.pad_hi; ++k)
      hi_buf[plan.tail + k] = ~word{0} - (plan.pad_hi - 1 - k);
  }
  const Blocks x(data.data(), plan, b, lo_buf.empty() ? nullptr : lo_buf.data(),
                 hi_buf.empty() ? nullptr : hi_buf.data());

  compute_block_metadata(x, l, opts);
  end_merge(x, l, opts, &stats);
  seq_sort(x, l, 0, x.count());

  if (plan.pad_lo != 0) {
    if (opts.verify)
      for (std::size_t k = 0; k < plan.pad_lo; ++k)
        if (lo_buf[k] != k) throw InvariantError("low sentinel displaced");
    std::copy(lo_buf.begin() + plan.pad_lo, lo_buf.end(), data.begin());
  }
  if (plan.pad_hi != 0) {
    if (opts.verify)
      for (std::size_t k = 0; k < plan.pad_hi; ++k)
        if (hi_buf[plan.tail + k] != ~word{0} - (plan.pad_hi - 1 - k))
          throw InvariantError("high sentinel displaced");
    std::copy(hi_buf.begin(), hi_buf.begin() + plan.tail,
              data.end() - plan.tail);
  }
  return stats;
}

}  // namespace pip::merge
