#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>

#include "pip/core.hpp"

namespace pip::buf {

// aux slots [aux_start, aux_start + s) followed by 2ws encoding cells; pair
// enc_start + 2(wt + p) holds bit p of aux slot t.
struct RestorableBuffer {
  std::size_t aux_start = 0;
  std::size_t aux_len = 0;
  unsigned word_bits = 64;
  bool adjustable = false;

  std::size_t enc_start() const { return aux_start + aux_len; }
  std::size_t enc_len() const { return 2 * std::size_t{word_bits} * aux_len; }
  std::size_t end() const { return enc_start() + enc_len(); }
  std::size_t total_cells() const { return end() - aux_start; }
  word low_mask() const {
    return word_bits >= 64 ? ~word{0} : (word{1} << word_bits) - 1;
  }
  bool in_aux(std::size_t i) const {
    return i >= aux_start && i < enc_start();
  }
  bool in_enc(std::size_t i) const { return i >= enc_start() && i < end(); }

  static std::size_t cells_for(std::size_t s, unsigned w) {
    return s + 2 * std::size_t{w} * s;
  }
};

void buffer_init(std::span<word> a, const RestorableBuffer& b);
void buffer_restore(std::span<word> a, const RestorableBuffer& b);

word simulated_read(std::span<const word> a, const RestorableBuffer& b,
                    std::size_t t);
void simulated_write(std::span<word> a, const RestorableBuffer& b,
                     std::size_t t, word v);
// cell is an absolute index inside the encoding range.
void encoding_write(std::span<word> a, const RestorableBuffer& b,
                    std::size_t cell, word v);

// Adjustable buffer that checks the no-overlap contract between simulated
// aux operations and encoding writes via in-flight epoch counters.
class AdjustableBuffer {
 public:
  AdjustableBuffer(std::span<word> a, RestorableBuffer b);

  const RestorableBuffer& descriptor() const { return b_; }
  void init() { buffer_init(a_, b_); }
  void restore() { buffer_restore(a_, b_); }
  word read(std::size_t t);
  void write(std::size_t t, word v);
  void encoding_write(std::size_t cell, word v);
  // Number of detected overlaps (0 unless the contract was broken).
  std::size_t violations() const { return violations_.load(); }

 private:
  std::span<word> a_;
  RestorableBuffer b_;
  std::atomic<std::size_t> sim_in_flight_{0};
  std::atomic<std::size_t> enc_in_flight_{0};
  std::atomic<std::size_t> violations_{0};
};

// Word storage over the low `bits` of each cell, leaving the high bits alone.
// With bits == 64 it is a plain atomic word array. All accesses are relaxed
// atomics so concurrent updates to disjoint bit ranges of one cell are safe.
class MaskedWords {
 public:
  MaskedWords() = default;
  MaskedWords(word* cells, std::size_t count, unsigned bits)
      : cells_(cells), count_(count), bits_(bits),
        mask_(bits >= 64 ? ~word{0} : (word{1} << bits) - 1) {}

  std::size_t size() const { return count_; }
  unsigned bits() const { return bits_; }
  word mask() const { return mask_; }

  word load(std::size_t i) const {
    return std::atomic_ref<word>(cells_[i]).load(std::memory_order_relaxed) &
           mask_;
  }
  void store(std::size_t i, word v) {
    std::atomic_ref<word> ref(cells_[i]);
    if (mask_ == ~word{0}) {
      ref.store(v, std::memory_order_relaxed);
      return;
    }
    word cur = ref.load(std::memory_order_relaxed);
    while (!ref.compare_exchange_weak(cur, (cur & ~mask_) | (v & mask_),
                                      std::memory_order_relaxed)) {
    }
  }
  // Succeeds iff the low bits equal expected; on failure expected is reloaded.
  bool compare_exchange(std::size_t i, word& expected, word desired) {
    std::atomic_ref<word> ref(cells_[i]);
    word cur = ref.load(std::memory_order_relaxed);
    for (;;) {
      if ((cur & mask_) != expected) {
        expected = cur & mask_;
        return false;
      }
      if (ref.compare_exchange_weak(cur, (cur & ~mask_) | (desired & mask_),
                                    std::memory_order_relaxed))
        return true;
    }
  }

 private:
  word* cells_ = nullptr;
  std::size_t count_ = 0;
  unsigned bits_ = 64;
  word mask_ = ~word{0};
};

}  // namespace pip::buf
