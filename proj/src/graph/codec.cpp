#include <algorithm>
#include <atomic>
#include <bit>
#include <numeric>

#include "pip/graph.hpp"
#include "pip/parallel.hpp"
#include "pip/random.hpp"

namespace pip::graph {

namespace {

constexpr std::size_t kRaw = 4;
constexpr std::size_t kBlockGrain = 64;

struct Widths {
  unsigned s, p, backup;
};

Widths widths(vertex n, std::size_t m, std::size_t b) {
  const std::size_t nblocks = n >= b ? n / b : 1;
  const std::size_t maxlen = n >= b ? b + n % b : n;
  return {std::max(1u, unsigned(std::bit_width(maxlen - 1))),
          std::max(1u, unsigned(std::bit_width(nblocks - 1))),
          unsigned(std::bit_width(std::max<std::size_t>(2 * m, b)))};
}

std::vector<std::pair<std::string, unsigned>> field_list(const Widths& w) {
  return {{"S", w.s},           {"P", w.p},           {"root", 1},
          {"coin", 1},          {"backup0", w.backup}, {"backup1", w.backup},
          {"backup2", w.backup}, {"backup3", w.backup}};
}

}  // namespace

std::size_t codec_block_size(vertex n, std::size_t m) {
  require(n >= 1, "graph has no vertices");
  std::size_t b = 8;
  for (;;) {
    std::size_t need = enc::BlockLayout::required_cells(kRaw, field_list(widths(n, m, b)));
    need += need & 1;
    if (need <= b) return b;
    b = need;
  }
}

Codec::Codec(CsrGraph& g) : g_(&g) {
  const vertex n = g.n();
  b_ = codec_block_size(n, g.m());
  nblocks_ = n >= b_ ? n / b_ : 1;
  layout_ = enc::BlockLayout(b_, kRaw, field_list(widths(n, g.m(), b_)));
  S_ = layout_.field("S");
  P_ = layout_.field("P");
  root_ = layout_.field("root");
  coin_ = layout_.field("coin");
  for (int q = 0; q < 4; ++q) backup_[q] = layout_.field("backup" + std::to_string(q));
  if (n < b_) {
    aux_.resize(b_);
    std::iota(aux_.begin(), aux_.end(), word{0});
  }
}

std::size_t Codec::block_of(vertex p) const {
  if (nblocks_ == 1) return 0;
  return std::min<std::size_t>((p - 1) / b_, nblocks_ - 1);
}

std::size_t Codec::block_len(std::size_t blk) const {
  if (owns_block()) return g_->n();
  return blk + 1 == nblocks_ ? g_->n() - blk * b_ : b_;
}

word* Codec::block_ptr(std::size_t blk) {
  return owns_block() ? aux_.data() : g_->offsets() + blk * b_;
}

const word* Codec::block_ptr(std::size_t blk) const {
  return owns_block() ? aux_.data() : g_->offsets() + blk * b_;
}

word Codec::offset(vertex p) const {
  if (p == 0) return 0;
  const word* A = g_->offsets();
  if (!init_ || owns_block()) return A[p - 1];
  const std::size_t blk = block_of(p);
  const std::size_t q = (p - 1) - blk * b_;
  const word* base = block_ptr(blk);
  if (q < kRaw) return backup_[q].read(base);
  if (q >= b_) return A[p - 1];
  // Cells past the raw region are paired from kRaw; the original order is
  // ascending, so each pair's min is its first offset.
  if ((q - kRaw) % 2 == 0) return std::min(base[q], base[q + 1]);
  return std::max(base[q - 1], base[q]);
}

vertex Codec::center(std::size_t blk) const {
  return first_vertex(blk) + S_.read(block_ptr(blk));
}

std::size_t Codec::parent(std::size_t blk) const { return P_.read(block_ptr(blk)); }
bool Codec::is_root(std::size_t blk) const { return root_.read(block_ptr(blk)) != 0; }
bool Codec::coin(std::size_t blk) const { return coin_.read(block_ptr(blk)) != 0; }

StoredEdge Codec::stored(std::size_t blk) const {
  const word* p = block_ptr(blk);
  StoredEdge s;
  const word lock = std::atomic_ref<const word>(p[0]).load(std::memory_order_acquire);
  s.present = p[1] != 0;
  if (s.present) {
    s.edge = {p[1], p[2], p[3]};
    s.far_center = lock >> 1;
  }
  return s;
}

void Codec::init(std::uint64_t seed, const std::vector<vertex>* centers) {
  require(!init_, "codec already initialised");
  if (centers) require(centers->size() == nblocks_, "one center per block required");
  par::for_each(0, nblocks_, kBlockGrain, [&](std::size_t blk) {
    word* p = block_ptr(blk);
    const std::size_t len = block_len(blk);
    word offset_in_block;
    if (centers) {
      const vertex c = (*centers)[blk];
      require(c >= first_vertex(blk) && c < first_vertex(blk) + len,
              "fixture center outside its block");
      offset_in_block = c - first_vertex(blk);
    } else {
      offset_in_block = rng::below(seed, rng::Stream::center, blk, len);
    }
    for (std::size_t q = 0; q < kRaw; ++q) backup_[q].write(p, p[q]);
    S_.write(p, offset_in_block);
    P_.write(p, blk);
    root_.write(p, 1);
    coin_.write(p, 0);
    for (std::size_t q = 0; q < kRaw; ++q) p[q] = 0;
  });
  init_ = true;
}

void Codec::restore() {
  require(init_, "codec not initialised");
  par::for_each(0, nblocks_, kBlockGrain, [&](std::size_t blk) {
    word* p = block_ptr(blk);
    word saved[kRaw];
    for (std::size_t q = 0; q < kRaw; ++q) saved[q] = backup_[q].read(p);
    enc::reset_pairs(p + kRaw, (b_ - kRaw) / 2);
    for (std::size_t q = 0; q < kRaw; ++q) p[q] = saved[q];
  });
  init_ = false;
}

void Codec::set_parent(std::size_t blk, std::size_t parent) {
  P_.write(block_ptr(blk), parent);
}
void Codec::set_root(std::size_t blk, bool root) { root_.write(block_ptr(blk), root); }
void Codec::set_coin(std::size_t blk, bool coin) { coin_.write(block_ptr(blk), coin); }

void Codec::clear_slot(std::size_t blk) {
  word* p = block_ptr(blk);
  p[1] = p[2] = p[3] = 0;
  std::atomic_ref<word>(p[0]).store(0, std::memory_order_release);
}

bool Codec::offer(std::size_t blk, const Edge& e, vertex far_center) {
  word* p = block_ptr(blk);
  std::atomic_ref<word> lock(p[0]);
  word cur = lock.load(std::memory_order_relaxed);
  for (;;) {
    if (cur & 1) {
      cur = lock.load(std::memory_order_relaxed);
      continue;
    }
    if (lock.compare_exchange_weak(cur, cur | 1, std::memory_order_acquire,
                                   std::memory_order_relaxed))
      break;
  }
  const bool better = p[1] == 0 || EdgeKey(e) < EdgeKey(p[1], p[2], p[3]);
  word next = cur;
  if (better) {
    p[1] = e.u;
    p[2] = e.v;
    p[3] = e.w;
    next = far_center << 1;
  }
  lock.store(next, std::memory_order_release);
  return better;
}

}  // namespace pip::graph
