#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>

#include "pip/core.hpp"
#include "pip/encoding.hpp"

namespace pip::merge {

// Padding sentinels are the words 0 .. pad_lo - 1 and ~0 - pad_hi + 1 .. ~0
// (pad counts < block size). When a side needs padding, keys in its
// sentinel range are rejected. Inputs shorter than two blocks are merged
// without padding.

struct Options {
  std::size_t block_size = 0;  // 0: default from the input size
  std::uint64_t seed = 1;
  bool precomputed_coins = false;  // 32 coin bits stored per block
  bool round_cap = false;          // cap at 3 log2 N, then cycle leaders
  bool cache_target = false;       // T kept in the first cell of each block
  bool verify = false;             // O(n) input checks
};

struct Stats {
  std::size_t block_size = 0;
  std::size_t blocks = 0;
  std::size_t rounds = 0;
  std::size_t cycle_leader_blocks = 0;  // blocks placed after the round cap
};

std::size_t default_block_size(std::size_t total, const Options& opts);

// Per-block field positions. Left side [0, s) holds {inv, R, I, E} (after the
// optional T cache), right side [s, b - 1) holds {T, C, D} (plus coin word);
// cell b - 1 is the unencoded endpoint.
class Layout {
 public:
  static Layout make(std::size_t block_size, std::size_t blocks,
                     const Options& opts);

  std::size_t b = 0;
  std::size_t s = 0;
  std::size_t blocks = 0;
  unsigned fw = 0;  // width of index fields; N fits
  bool cache_target = false;
  bool precomputed_coins = false;
  enc::BlockLayout left;
  enc::BlockLayout right;
  enc::FieldRef inv, R, I, E, T, C, D, coins;
  std::size_t left_pairs_begin = 0;  // first encoded cell on the left side
  std::size_t right_pairs_end = 0;   // one past the last encoded right cell

  // "No opposite block" value of inv.
  std::size_t none() const { return blocks; }
};

struct AlignmentPlan {
  std::size_t pad_lo = 0;  // -inf sentinels before A
  std::size_t pad_hi = 0;  // +inf sentinels after B
  std::size_t head = 0;    // A cells sharing the first block with pad_lo
  std::size_t tail = 0;    // B cells sharing the last block with pad_hi
  std::size_t a_blocks = 0;
  std::size_t b_blocks = 0;

  bool empty() const { return pad_lo == 0 && pad_hi == 0; }
  std::size_t blocks() const { return a_blocks + b_blocks; }
};

AlignmentPlan align_inputs(std::size_t na, std::size_t nb, std::size_t b);

// Virtual block sequence: real storage, except that a padded first or last
// block lives in a side buffer.
class Blocks {
 public:
  Blocks(word* data, const AlignmentPlan& plan, std::size_t b, word* lo_buf,
         word* hi_buf)
      : data_(data), lo_(lo_buf), hi_(hi_buf), pad_lo_(plan.pad_lo), b_(b),
        a_blocks_(plan.a_blocks), count_(plan.blocks()) {}

  word* operator[](std::size_t i) const {
    if (i == 0 && lo_ != nullptr) return lo_;
    if (i + 1 == count_ && hi_ != nullptr) return hi_;
    return data_ + i * b_ - pad_lo_;
  }
  std::size_t count() const { return count_; }
  std::size_t a_blocks() const { return a_blocks_; }
  std::size_t b() const { return b_; }
  word endpoint(std::size_t i) const { return (*this)[i][b_ - 1]; }

 private:
  word* data_;
  word* lo_;
  word* hi_;
  std::size_t pad_lo_;
  std::size_t b_;
  std::size_t a_blocks_;
  std::size_t count_;
};

void compute_block_metadata(const Blocks& x, const Layout& l,
                            const Options& opts);
// Returns the number of rounds executed.
std::size_t end_merge(const Blocks& x, const Layout& l, const Options& opts,
                      Stats* stats = nullptr);
bool done(const Blocks& x, const Layout& l, std::atomic<word>& flag);
void separate(const Blocks& x, const Layout& l, std::size_t lo, std::size_t hi);
void seq_sort(const Blocks& x, const Layout& l, std::size_t lo, std::size_t hi);
// Orders every encoded pair of block i ascending.
void reset_block(const Blocks& x, const Layout& l, std::size_t i);

// Merges data[0, left_size) and data[left_size, n) in place. Inputs with
// fewer than 2b elements in total use std::inplace_merge (at most b words of
// temporary storage).
Stats merge(std::span<word> data, std::size_t left_size,
            const Options& opts = {});

}  // namespace pip::merge
