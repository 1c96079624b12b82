#include "pip/encoding.hpp"

#include <algorithm>

#include "pip/parallel.hpp"

namespace pip::enc {
namespace {

constexpr std::size_t kSequentialPairs = 64;

void check_range(EncodedRegion r, std::size_t i, std::size_t j) {
  require(j > i, "encoded range is empty");
  require((j - i) % 2 == 0, "encoded range has odd length");
  require(j <= r.size(), "encoded range exceeds region");
}

// Word-aligned split so each leaf owns whole output words.
void read_rec(const word* p, std::size_t pairs, std::uint64_t* out) {
  if (pairs <= kSequentialPairs) {
    *out = read_pairs(p, pairs);
    return;
  }
  const std::size_t words = (pairs + 63) / 64;
  const std::size_t left = words / 2 * 64;
  par::pair(true, [&] { read_rec(p, left, out); },
            [&] { read_rec(p + 2 * left, pairs - left, out + left / 64); });
}

void write_rec(word* p, std::size_t pairs, const std::uint64_t* in) {
  if (pairs <= kSequentialPairs) {
    write_pairs(p, pairs, *in);
    return;
  }
  const std::size_t words = (pairs + 63) / 64;
  const std::size_t left = words / 2 * 64;
  par::pair(true, [&] { write_rec(p, left, in); },
            [&] { write_rec(p + 2 * left, pairs - left, in + left / 64); });
}

}  // namespace

std::uint64_t read_block(EncodedRegion r, std::size_t i, std::size_t j) {
  check_range(r, i, j);
  require((j - i) / 2 <= 64, "read_block value wider than 64 bits");
  return read_pairs(r.cells.data() + i, (j - i) / 2);
}

void write_block(EncodedRegion r, std::size_t i, std::size_t j,
                 std::uint64_t v) {
  check_range(r, i, j);
  const std::size_t pairs = (j - i) / 2;
  require(pairs <= 64, "write_block value wider than 64 bits");
  require(pairs == 64 || (v >> pairs) == 0, "value does not fit block");
  write_pairs(r.cells.data() + i, pairs, v);
}

void read_bits(EncodedRegion r, std::size_t i, std::size_t j,
               std::span<std::uint64_t> out) {
  check_range(r, i, j);
  const std::size_t pairs = (j - i) / 2;
  require(out.size() >= (pairs + 63) / 64, "output span too small");
  read_rec(r.cells.data() + i, pairs, out.data());
}

void write_bits(EncodedRegion r, std::size_t i, std::size_t j,
                std::span<const std::uint64_t> in) {
  check_range(r, i, j);
  const std::size_t pairs = (j - i) / 2;
  require(in.size() >= (pairs + 63) / 64, "input span too small");
  if (pairs % 64 != 0)
    require((in[pairs / 64] >> (pairs % 64)) == 0, "value does not fit block");
  write_rec(r.cells.data() + i, pairs, in.data());
}

std::size_t BlockLayout::required_cells(
    std::size_t raw_cells,
    const std::vector<std::pair<std::string, unsigned>>& fields) {
  std::size_t cells = raw_cells;
  for (const auto& f : fields) cells += 2 * static_cast<std::size_t>(f.second);
  return cells;
}

BlockLayout::BlockLayout(
    std::size_t block_size, std::size_t raw_cells,
    const std::vector<std::pair<std::string, unsigned>>& fields)
    : block_size_(block_size), raw_cells_(raw_cells) {
  std::size_t offset = raw_cells;
  for (const auto& [name, bits] : fields) {
    require(bits >= 1 && bits <= 64, "field width must be in 1..64: " + name);
    require(!has(name), "duplicate field: " + name);
    fields_.push_back(Field{name, bits, offset});
    offset += 2 * static_cast<std::size_t>(bits);
  }
  used_ = offset;
  require(used_ <= block_size_,
          "layout needs " + std::to_string(used_) + " cells, block has " +
              std::to_string(block_size_));
}

bool BlockLayout::has(std::string_view name) const {
  return std::any_of(fields_.begin(), fields_.end(),
                     [&](const Field& f) { return f.name == name; });
}

FieldRef BlockLayout::field(std::string_view name) const {
  for (const auto& f : fields_)
    if (f.name == name) return FieldRef{f.offset, f.bits};
  throw ContractViolation("unknown field: " + std::string(name));
}

namespace {

word* block_ptr(EncodedRegion r, const BlockLayout& layout, std::size_t b) {
  require((b + 1) * layout.block_size() <= r.size(), "block index out of range");
  return r.cells.data() + b * layout.block_size();
}

}  // namespace

std::uint64_t read_field(EncodedRegion r, const BlockLayout& layout,
                         std::size_t block_index, std::string_view name) {
  return layout.field(name).read(block_ptr(r, layout, block_index));
}

void write_field(EncodedRegion r, const BlockLayout& layout,
                 std::size_t block_index, std::string_view name,
                 std::uint64_t v) {
  const FieldRef f = layout.field(name);
  require(v <= f.max_value(), "value overflows field: " + std::string(name));
  f.write(block_ptr(r, layout, block_index), v);
}

PermUnit::PermUnit(unsigned k) : k_(k) {
  require(k >= 1 && k <= kMaxK, "unit size must be in 1..20");
  fact_[0] = 1;
  for (unsigned i = 1; i <= kMaxK; ++i) fact_[i] = fact_[i - 1] * i;
}

std::uint64_t PermUnit::rank(std::span<const unsigned> pi) const {
  require(pi.size() == k_, "permutation length differs from unit size");
  std::array<unsigned, kMaxK> cur{};
  std::array<bool, kMaxK + 1> seen{};
  for (unsigned i = 0; i < k_; ++i) {
    require(pi[i] >= 1 && pi[i] <= k_ && !seen[pi[i]], "not a permutation");
    seen[pi[i]] = true;
    cur[i] = pi[i];
  }
  std::uint64_t r = 0;
  for (unsigned len = k_, head = 0; len > 1; --len, ++head) {
    const unsigned first = cur[head];
    r += static_cast<std::uint64_t>(first - 1) * fact_[len - 1];
    for (unsigned i = head + 1; i < k_; ++i)
      if (cur[i] > first) --cur[i];
  }
  return r;
}

std::vector<unsigned> PermUnit::unrank(std::uint64_t r) const {
  require(r < fact_[k_], "rank out of range for unit size");
  std::vector<unsigned> digits(k_);
  for (unsigned len = k_, pos = 0; len >= 1; --len, ++pos) {
    digits[pos] = static_cast<unsigned>(r / fact_[len - 1]);
    r %= fact_[len - 1];
  }
  // Rebuild from the tail: prepend first = d + 1 and lift the suffix past it.
  std::vector<unsigned> pi(k_);
  for (unsigned pos = k_; pos-- > 0;) {
    const unsigned first = digits[pos] + 1;
    for (unsigned i = pos + 1; i < k_; ++i)
      if (pi[i] >= first) ++pi[i];
    pi[pos] = first;
  }
  return pi;
}

std::uint64_t perm_rank(std::span<const unsigned> pi) {
  require(!pi.empty() && pi.size() <= PermUnit::kMaxK,
          "permutation length must be in 1..20");
  return PermUnit(static_cast<unsigned>(pi.size())).rank(pi);
}

std::vector<unsigned> perm_unrank(std::uint64_t r, unsigned k) {
  return PermUnit(k).unrank(r);
}

void unit_write(std::span<word> unit, std::uint64_t v) {
  const PermUnit pu(static_cast<unsigned>(unit.size()));
  const std::vector<unsigned> pi = pu.unrank(v);
  std::array<word, PermUnit::kMaxK> sorted{};
  std::copy(unit.begin(), unit.end(), sorted.begin());
  std::sort(sorted.begin(), sorted.begin() + unit.size());
  for (std::size_t i = 1; i < unit.size(); ++i)
    require(sorted[i - 1] != sorted[i], "unit elements are not distinct");
  for (std::size_t i = 0; i < unit.size(); ++i) unit[i] = sorted[pi[i] - 1];
}

std::uint64_t unit_read(std::span<const word> unit) {
  const PermUnit pu(static_cast<unsigned>(unit.size()));
  std::array<unsigned, PermUnit::kMaxK> pi{};
  for (std::size_t i = 0; i < unit.size(); ++i) {
    unsigned smaller = 0;
    for (std::size_t j = 0; j < unit.size(); ++j) {
      require(j == i || unit[j] != unit[i], "unit elements are not distinct");
      smaller += unit[j] < unit[i];
    }
    pi[i] = smaller + 1;
  }
  return pu.rank(std::span<const unsigned>(pi.data(), unit.size()));
}

}  // namespace pip::enc
