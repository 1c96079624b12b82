#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pip/buffers.hpp"
#include "pip/core.hpp"

namespace pip::shuffle {

// Target of swap i, uniform in [0, i]. A pure function of (seed, i).
std::size_t target(std::uint64_t seed, std::size_t i);

// Workspace words needed to process chunks of k swaps where every swap
// reserves at most `reservations` indices.
std::size_t workspace_words(std::size_t k, unsigned reservations);
// Smallest word width that can hold the workspace for arrays of n elements.
unsigned min_workspace_bits(std::size_t n);

// Processes swaps for ids hi-1 down to lo; the result equals the sequential
// Knuth shuffle with the same targets. Without `ws` the workspace is taken
// from the heap.
void parallel_knuth_shuffle(std::span<word> a, std::size_t lo, std::size_t hi,
                            std::uint64_t seed);
void parallel_knuth_shuffle(std::span<word> a, std::size_t lo, std::size_t hi,
                            std::uint64_t seed, buf::MaskedWords ws);
// Same with explicit targets h[i] in [0, i].
void parallel_knuth_shuffle(std::span<word> a, std::size_t lo, std::size_t hi,
                            std::span<const std::size_t> h);

// Whole-array shuffle in rounds of at most k swaps, highest ids first. The
// reservation table is reused across rounds.
void chunked_shuffle(std::span<word> a, std::size_t k, std::uint64_t seed);
void chunked_shuffle(std::span<word> a, std::size_t k, std::uint64_t seed,
                     buf::MaskedWords ws);
void chunked_shuffle(std::span<word> a, std::size_t k,
                     std::span<const std::size_t> h);

struct BufferedParams {
  std::size_t chunk = 0;       // 0: derived from n
  unsigned word_bits = 0;      // 0: derived from n
  std::size_t stage1_aux = 0;  // aux slots of the suffix buffer; 0: derived
  std::size_t stage2_aux = 0;  // aux slots of the prefix buffer; 0: derived
  // Keep reservation state on the heap. Lets tests run both stages with
  // buffers too small to hold it.
  bool heap_workspace = false;
};

struct BufferedStats {
  bool fallback = false;
  std::size_t chunk = 0;
  unsigned word_bits = 0;
  std::size_t stage1_cells = 0;  // suffix buffer [n - stage1_cells, n)
  std::size_t stage2_cells = 0;  // prefix buffer [0, stage2_cells)
  std::size_t stage2_swaps = 0;
};

// Buffers are sized from explicit params or derived; when they do not fit
// (small n) this falls back to parallel_knuth_shuffle with heap workspace.
// Keys must be distinct.
BufferedStats buffered_shuffle(std::span<word> a, std::uint64_t seed,
                               const BufferedParams& params = {});

using EncoderSpec = std::vector<std::pair<std::size_t, std::size_t>>;

// Transposes each pair independently with probability 1/2.
void uniform_encoder_apply(std::span<word> a, const EncoderSpec& spec,
                           std::uint64_t seed);

// Upper-tail p-value of Pearson's statistic against a uniform expectation.
double chi_square_uniform_p(std::span<const std::uint64_t> counts);

}  // namespace pip::shuffle
