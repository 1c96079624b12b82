#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pip/core.hpp"

namespace pip::enc {

// A run of distinct words; pair (2t, 2t+1) carries bit t by its order
// (ascending = 0, descending = 1).
struct EncodedRegion {
  std::span<word> cells;

  std::size_t size() const { return cells.size(); }
};

// Pair kernels on raw pointers; npairs <= 64.
inline std::uint64_t read_pairs(const word* p, std::size_t npairs) {
  std::uint64_t v = 0;
  for (std::size_t t = 0; t < npairs; ++t)
    v |= static_cast<std::uint64_t>(p[2 * t] > p[2 * t + 1]) << t;
  return v;
}

inline void write_pairs(word* p, std::size_t npairs, std::uint64_t v) {
  for (std::size_t t = 0; t < npairs; ++t) {
    const word a = p[2 * t];
    const word b = p[2 * t + 1];
    const word lo = a < b ? a : b;
    const word hi = a < b ? b : a;
    const bool bit = (v >> t) & 1u;
    p[2 * t] = bit ? hi : lo;
    p[2 * t + 1] = bit ? lo : hi;
  }
}

// Orders every pair ascending (all bits 0).
inline void reset_pairs(word* p, std::size_t npairs) {
  for (std::size_t t = 0; t < npairs; ++t)
    if (p[2 * t] > p[2 * t + 1]) std::swap(p[2 * t], p[2 * t + 1]);
}

// Value of pairs [i, j); j - i even, positive, at most 128 cells.
std::uint64_t read_block(EncodedRegion r, std::size_t i, std::size_t j);
void write_block(EncodedRegion r, std::size_t i, std::size_t j, std::uint64_t v);

// Multi-word variants: bit t of the range lands in out[t / 64]. Above 64
// pairs the range is split recursively and the halves run in parallel.
void read_bits(EncodedRegion r, std::size_t i, std::size_t j,
               std::span<std::uint64_t> out);
void write_bits(EncodedRegion r, std::size_t i, std::size_t j,
                std::span<const std::uint64_t> in);

// Location of a field inside a block.
struct FieldRef {
  std::size_t offset = 0;  // first cell
  unsigned bits = 0;

  std::uint64_t read(const word* block) const {
    return read_pairs(block + offset, bits);
  }
  void write(word* block, std::uint64_t v) const {
    write_pairs(block + offset, bits, v);
  }
  std::uint64_t max_value() const {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
  }
};

class BlockLayout {
 public:
  struct Field {
    std::string name;
    unsigned bits;
    std::size_t offset;
  };

  BlockLayout() = default;
  // Throws ContractViolation if the fields do not fit block_size.
  BlockLayout(std::size_t block_size, std::size_t raw_cells,
              const std::vector<std::pair<std::string, unsigned>>& fields);

  static std::size_t required_cells(
      std::size_t raw_cells,
      const std::vector<std::pair<std::string, unsigned>>& fields);

  std::size_t block_size() const { return block_size_; }
  std::size_t raw_cells() const { return raw_cells_; }
  // Cells used by raw cells plus all field pairs.
  std::size_t used_cells() const { return used_; }
  const std::vector<Field>& fields() const { return fields_; }
  bool has(std::string_view name) const;
  FieldRef field(std::string_view name) const;

 private:
  std::size_t block_size_ = 0;
  std::size_t raw_cells_ = 0;
  std::size_t used_ = 0;
  std::vector<Field> fields_;
};

std::uint64_t read_field(EncodedRegion r, const BlockLayout& layout,
                         std::size_t block_index, std::string_view name);
void write_field(EncodedRegion r, const BlockLayout& layout,
                 std::size_t block_index, std::string_view name,
                 std::uint64_t v);

// Permutation ranks per r(pi, k) = (pi(1) - 1)(k - 1)! + r(pi', k - 1).
class PermUnit {
 public:
  static constexpr unsigned kMaxK = 20;

  explicit PermUnit(unsigned k);

  unsigned k() const { return k_; }
  std::uint64_t factorial(unsigned i) const { return fact_[i]; }
  std::uint64_t rank(std::span<const unsigned> pi) const;
  std::vector<unsigned> unrank(std::uint64_t r) const;

 private:
  unsigned k_;
  std::array<std::uint64_t, kMaxK + 1> fact_{};
};

std::uint64_t perm_rank(std::span<const unsigned> pi);
std::vector<unsigned> perm_unrank(std::uint64_t r, unsigned k);

// A k-unit stores a rank < k! in the arrangement of its k distinct words.
void unit_write(std::span<word> unit, std::uint64_t v);
std::uint64_t unit_read(std::span<const word> unit);

}  // namespace pip::enc
