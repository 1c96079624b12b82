#include "pip/buffers.hpp"

#include "pip/encoding.hpp"
#include "pip/parallel.hpp"

namespace pip::buf {
namespace {

constexpr std::size_t kSlotGrain = 64;

void check_layout(std::span<const word> a, const RestorableBuffer& b) {
  require(b.word_bits >= 1 && b.word_bits <= 64, "word_bits must be in 1..64");
  require(b.aux_len >= 1, "buffer needs at least one aux slot");
  require(b.end() <= a.size(), "buffer exceeds array");
}

word* slot_pairs(word* a, const RestorableBuffer& b, std::size_t t) {
  return a + b.enc_start() + 2 * std::size_t{b.word_bits} * t;
}

const word* slot_pairs(const word* a, const RestorableBuffer& b,
                       std::size_t t) {
  return a + b.enc_start() + 2 * std::size_t{b.word_bits} * t;
}

}  // namespace

void buffer_init(std::span<word> a, const RestorableBuffer& b) {
  check_layout(a, b);
  const word mask = b.low_mask();
  par::for_each(0, b.aux_len, kSlotGrain, [&](std::size_t t) {
    enc::write_pairs(slot_pairs(a.data(), b, t), b.word_bits,
                     a[b.aux_start + t] & mask);
  });
}

void buffer_restore(std::span<word> a, const RestorableBuffer& b) {
  check_layout(a, b);
  const word mask = b.low_mask();
  par::for_each(0, b.aux_len, kSlotGrain, [&](std::size_t t) {
    word* p = slot_pairs(a.data(), b, t);
    const word low = enc::read_pairs(p, b.word_bits);
    std::atomic_ref<word> slot(a[b.aux_start + t]);
    word cur = slot.load(std::memory_order_relaxed);
    while (!slot.compare_exchange_weak(cur, (cur & ~mask) | low,
                                       std::memory_order_relaxed)) {
    }
    enc::reset_pairs(p, b.word_bits);
  });
}

word simulated_read(std::span<const word> a, const RestorableBuffer& b,
                    std::size_t t) {
  require(b.adjustable, "simulated access needs an adjustable buffer");
  require(t < b.aux_len, "aux slot out of range");
  const word high =
      std::atomic_ref<const word>(a[b.aux_start + t]).load(std::memory_order_relaxed) &
      ~b.low_mask();
  return high | enc::read_pairs(slot_pairs(a.data(), b, t), b.word_bits);
}

void simulated_write(std::span<word> a, const RestorableBuffer& b,
                     std::size_t t, word v) {
  require(b.adjustable, "simulated access needs an adjustable buffer");
  require(t < b.aux_len, "aux slot out of range");
  const word mask = b.low_mask();
  if (mask != ~word{0}) {
    std::atomic_ref<word> slot(a[b.aux_start + t]);
    word cur = slot.load(std::memory_order_relaxed);
    while (!slot.compare_exchange_weak(cur, (cur & mask) | (v & ~mask),
                                       std::memory_order_relaxed)) {
    }
  }
  enc::write_pairs(slot_pairs(a.data(), b, t), b.word_bits, v & mask);
}

void encoding_write(std::span<word> a, const RestorableBuffer& b,
                    std::size_t cell, word v) {
  require(b.adjustable, "encoding writes need an adjustable buffer");
  require(b.in_enc(cell), "cell is not in the encoding range");
  const std::size_t first = cell - ((cell - b.enc_start()) & 1);
  const std::size_t partner = cell == first ? first + 1 : first;
  require(a[partner] != v, "encoding write would duplicate its partner");
  const bool bit = a[first] > a[first + 1];
  a[cell] = v;
  if ((a[first] > a[first + 1]) != bit) std::swap(a[first], a[first + 1]);
}

AdjustableBuffer::AdjustableBuffer(std::span<word> a, RestorableBuffer b)
    : a_(a), b_(b) {
  require(b_.adjustable, "descriptor is not adjustable");
  check_layout(a_, b_);
}

word AdjustableBuffer::read(std::size_t t) {
  sim_in_flight_.fetch_add(1);
  if (enc_in_flight_.load() != 0) violations_.fetch_add(1);
  const word v = simulated_read(a_, b_, t);
  sim_in_flight_.fetch_sub(1);
  return v;
}

void AdjustableBuffer::write(std::size_t t, word v) {
  sim_in_flight_.fetch_add(1);
  if (enc_in_flight_.load() != 0) violations_.fetch_add(1);
  simulated_write(a_, b_, t, v);
  sim_in_flight_.fetch_sub(1);
}

void AdjustableBuffer::encoding_write(std::size_t cell, word v) {
  enc_in_flight_.fetch_add(1);
  if (sim_in_flight_.load() != 0) violations_.fetch_add(1);
  buf::encoding_write(a_, b_, cell, v);
  enc_in_flight_.fetch_sub(1);
}

}  // namespace pip::buf
