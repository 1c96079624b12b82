#include "pip/shuffle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <tbb/blocked_range.h>
#include <tbb/parallel_scan.h>

#include "pip/parallel.hpp"
#include "pip/random.hpp"

namespace pip::shuffle {

namespace {

constexpr std::size_t kGrain = 256;

std::size_t table_capacity(std::size_t k, unsigned reservations) {
  return std::bit_ceil(2 * std::size_t{reservations} * std::max<std::size_t>(k, 1));
}

// Open-addressed map index -> highest reserving swap id, stored as pairs of
// words (key, value) in a MaskedWords region. Words carry an epoch in their
// top bits so a new round starts by bumping the epoch; stale words read as
// empty. A full clear happens only when the epoch counter wraps.
class Reservations {
 public:
  Reservations(buf::MaskedWords ws, std::size_t capacity, unsigned key_bits)
      : ws_(ws), cap_(capacity), key_bits_(key_bits) {
    require(ws.bits() > key_bits, "workspace words too narrow for keys");
    const unsigned epoch_bits = ws.bits() - key_bits;
    max_epoch_ = epoch_bits >= 32 ? (word{1} << 32) : (word{1} << epoch_bits) - 1;
    clear();
  }

  void next_round() {
    if (++epoch_ > max_epoch_) {
      clear();
      epoch_ = 1;
    }
  }

  void reserve(std::size_t index, std::size_t id) {
    const std::size_t j = slot(index);
    const word want = pack(id);
    word cur = ws_.load(2 * j + 1);
    while (stale(cur) || cur < want) {
      if (ws_.compare_exchange(2 * j + 1, cur, want)) return;
    }
  }

  bool holds(std::size_t index, std::size_t id) const {
    std::size_t j = home(index);
    const word key = pack(index);
    for (;;) {
      const word kw = ws_.load(2 * j);
      if (kw == key) return ws_.load(2 * j + 1) == pack(id);
      if (stale(kw)) return false;
      j = (j + 1) & (cap_ - 1);
    }
  }

 private:
  word pack(std::size_t x) const { return (epoch_ << key_bits_) | (x + 1); }
  bool stale(word w) const { return (w >> key_bits_) != epoch_; }
  std::size_t home(std::size_t index) const {
    return rng::mix(index) & (cap_ - 1);
  }

  // Claims or finds the key slot for index.
  std::size_t slot(std::size_t index) {
    std::size_t j = home(index);
    const word key = pack(index);
    for (;;) {
      word kw = ws_.load(2 * j);
      if (kw == key) return j;
      if (stale(kw)) {
        if (ws_.compare_exchange(2 * j, kw, key)) return j;
        if (kw == key) return j;
        if (stale(kw)) continue;
      }
      j = (j + 1) & (cap_ - 1);
    }
  }

  void clear() {
    par::for_each(0, 2 * cap_, 4096, [&](std::size_t i) { ws_.store(i, 0); });
  }

  buf::MaskedWords ws_;
  std::size_t cap_;
  unsigned key_bits_;
  word epoch_ = 0;
  word max_epoch_ = 1;
};

// Runs id ranges in rounds of at most k swaps. Policy supplies:
//   target(i), reserved(i, h, f) calling f for each reserved index,
//   kPhases, and execute(phase, i, h) for winning swaps.
template <class Policy>
class Engine {
 public:
  Engine(buf::MaskedWords ws, std::size_t k, std::size_t n, Policy& policy)
      : ws_(ws),
        k_(std::max<std::size_t>(k, 1)),
        cap_(table_capacity(k_, Policy::kReservations)),
        table_(ws, cap_, std::bit_width(n)),
        policy_(policy) {
    require(ws.size() >= workspace_words(k_, Policy::kReservations),
            "workspace too small for chunk size");
  }

  // Ids hi-1 down to lo in chunks of k.
  void run(std::size_t lo, std::size_t hi) {
    for (std::size_t top = hi; top > lo;) {
      const std::size_t bottom = top - std::min(k_, top - lo);
      round(bottom, top);
      top = bottom;
    }
  }

 private:
  std::size_t pend(int side, std::size_t j) const {
    return ws_.load(2 * cap_ + side * k_ + j);
  }
  void set_pend(int side, std::size_t j, std::size_t id) {
    ws_.store(2 * cap_ + side * k_ + j, id);
  }

  bool won(std::size_t i, std::size_t h) const {
    bool ok = true;
    policy_.reserved(i, h, [&](std::size_t idx) { ok = ok && table_.holds(idx, i); });
    return ok;
  }

  void round(std::size_t lo, std::size_t hi) {
    std::size_t count = hi - lo;
    int side = 0;
    par::for_each(0, count, kGrain, [&](std::size_t j) { set_pend(0, j, hi - 1 - j); });
    while (count > 0) {
      table_.next_round();
      par::for_each(0, count, kGrain, [&](std::size_t j) {
        const std::size_t i = pend(side, j);
        const std::size_t h = policy_.target(i);
        policy_.reserved(i, h, [&](std::size_t idx) { table_.reserve(idx, i); });
      });
      for (int phase = 0; phase < Policy::kPhases; ++phase) {
        par::for_each(0, count, kGrain, [&](std::size_t j) {
          const std::size_t i = pend(side, j);
          const std::size_t h = policy_.target(i);
          if (won(i, h)) policy_.execute(phase, i, h);
        });
      }
      count = pack(side, count);
      side ^= 1;
    }
  }

  // Copies unfinished swaps to the other pending list; returns their count.
  std::size_t pack(int side, std::size_t count) {
    auto body = [&](const tbb::blocked_range<std::size_t>& r, std::size_t sum,
                    bool final) {
      for (std::size_t j = r.begin(); j < r.end(); ++j) {
        const std::size_t i = pend(side, j);
        if (won(i, policy_.target(i))) continue;
        if (final) set_pend(side ^ 1, sum, i);
        ++sum;
      }
      return sum;
    };
    const tbb::blocked_range<std::size_t> all(0, count, kGrain);
    if (count <= kGrain) return body(all, 0, true);
    return tbb::parallel_scan(all, std::size_t{0}, body, std::plus<>());
  }

  buf::MaskedWords ws_;
  std::size_t k_;
  std::size_t cap_;
  Reservations table_;
  Policy& policy_;
};

template <class TargetFn>
struct PlainPolicy {
  static constexpr unsigned kReservations = 2;
  static constexpr int kPhases = 1;
  word* a;
  TargetFn target;

  template <class F>
  void reserved(std::size_t i, std::size_t h, F&& f) const {
    f(i);
    if (h != i) f(h);
  }
  void execute(int, std::size_t i, std::size_t h) const {
    std::swap(a[i], a[h]);
  }
};

// Remaining swaps with a live adjustable buffer in the prefix: aux targets go
// through simulated access, encoding targets keep their pair's bit, and a
// swap into an encoding pair reserves both cells of the pair.
struct BufferedPolicy {
  static constexpr unsigned kReservations = 3;
  static constexpr int kPhases = 2;
  std::span<word> a;
  buf::RestorableBuffer b;
  std::uint64_t seed;

  std::size_t target(std::size_t i) const { return shuffle::target(seed, i); }

  template <class F>
  void reserved(std::size_t i, std::size_t h, F&& f) const {
    f(i);
    if (h == i) return;
    f(h);
    if (b.in_enc(h)) f(partner(h));
  }
  std::size_t partner(std::size_t h) const {
    return ((h - b.enc_start()) & 1) ? h - 1 : h + 1;
  }

  void execute(int phase, std::size_t i, std::size_t h) const {
    if (h == i) return;
    const bool aux = b.in_aux(h);
    if (phase == 0 && aux) {
      const std::size_t t = h - b.aux_start;
      const word v = buf::simulated_read(a, b, t);
      buf::simulated_write(a, b, t, a[i]);
      a[i] = v;
    } else if (phase == 1 && !aux) {
      if (b.in_enc(h)) {
        const word v = a[h];
        buf::encoding_write(a, b, h, a[i]);
        a[i] = v;
      } else {
        std::swap(a[i], a[h]);
      }
    }
  }
};

struct SeedTarget {
  std::uint64_t seed;
  std::size_t operator()(std::size_t i) const { return target(seed, i); }
};

struct FixedTarget {
  std::span<const std::size_t> h;
  std::size_t operator()(std::size_t i) const { return h[i]; }
};

template <class TargetFn>
void run_plain(std::span<word> a, std::size_t lo, std::size_t hi, std::size_t k,
               TargetFn t, buf::MaskedWords ws) {
  PlainPolicy<TargetFn> policy{a.data(), t};
  Engine<PlainPolicy<TargetFn>> engine(ws, k, a.size(), policy);
  engine.run(lo, hi);
}

template <class TargetFn>
void run_plain_heap(std::span<word> a, std::size_t lo, std::size_t hi,
                    std::size_t k, TargetFn t) {
  if (hi <= lo) return;
  std::vector<word> ws(workspace_words(k, 2));
  run_plain(a, lo, hi, k, t, buf::MaskedWords(ws.data(), ws.size(), 64));
}

void check_targets(std::span<word> a, std::span<const std::size_t> h,
                   std::size_t hi) {
  require(hi <= a.size() && hi <= h.size(), "target vector too short");
  for (std::size_t i = 0; i < hi; ++i) require(h[i] <= i, "target above its index");
}

unsigned default_word_bits(std::size_t n) {
  return std::min(64u, unsigned(std::bit_width(n)) + 8);
}

std::size_t default_chunk(std::size_t n) {
  const double lg = std::max(1.0, std::log2(double(n)));
  return std::max<std::size_t>(1, std::size_t(std::ceil(double(n) / (lg * lg))));
}

}  // namespace

std::size_t target(std::uint64_t seed, std::size_t i) {
  return rng::below(seed, rng::Stream::shuffle_target, i, std::uint64_t{i} + 1);
}

std::size_t workspace_words(std::size_t k, unsigned reservations) {
  k = std::max<std::size_t>(k, 1);
  return 2 * table_capacity(k, reservations) + 2 * k;
}

unsigned min_workspace_bits(std::size_t n) { return unsigned(std::bit_width(n)) + 1; }

void parallel_knuth_shuffle(std::span<word> a, std::size_t lo, std::size_t hi,
                            std::uint64_t seed) {
  require(lo <= hi && hi <= a.size(), "bad id range");
  run_plain_heap(a, lo, hi, hi - lo, SeedTarget{seed});
}

void parallel_knuth_shuffle(std::span<word> a, std::size_t lo, std::size_t hi,
                            std::uint64_t seed, buf::MaskedWords ws) {
  require(lo <= hi && hi <= a.size(), "bad id range");
  if (hi > lo) run_plain(a, lo, hi, hi - lo, SeedTarget{seed}, ws);
}

void parallel_knuth_shuffle(std::span<word> a, std::size_t lo, std::size_t hi,
                            std::span<const std::size_t> h) {
  require(lo <= hi && hi <= a.size(), "bad id range");
  check_targets(a, h, hi);
  run_plain_heap(a, lo, hi, hi - lo, FixedTarget{h});
}

void chunked_shuffle(std::span<word> a, std::size_t k, std::uint64_t seed) {
  require(k >= 1, "chunk size must be positive");
  run_plain_heap(a, 1, std::max<std::size_t>(a.size(), 1), std::min(k, a.size()),
                 SeedTarget{seed});
}

void chunked_shuffle(std::span<word> a, std::size_t k, std::uint64_t seed,
                     buf::MaskedWords ws) {
  require(k >= 1, "chunk size must be positive");
  if (a.size() > 1) run_plain(a, 1, a.size(), k, SeedTarget{seed}, ws);
}

void chunked_shuffle(std::span<word> a, std::size_t k,
                     std::span<const std::size_t> h) {
  require(k >= 1, "chunk size must be positive");
  check_targets(a, h, a.size());
  run_plain_heap(a, 1, std::max<std::size_t>(a.size(), 1), std::min(k, a.size()),
                 FixedTarget{h});
}

BufferedStats buffered_shuffle(std::span<word> a, std::uint64_t seed,
                               const BufferedParams& params) {
  const std::size_t n = a.size();
  BufferedStats st;
  st.word_bits = params.word_bits ? params.word_bits : default_word_bits(n);
  require(st.word_bits >= 1 && st.word_bits <= 64, "word bits out of range");
  const bool heap = params.heap_workspace;
  if (!heap && params.word_bits)
    require(st.word_bits >= min_workspace_bits(n), "word bits too small for workspace");
  const unsigned w = st.word_bits;

  auto slots = [&](std::size_t explicit_s, std::size_t k, unsigned r) {
    if (explicit_s) return explicit_s;
    return heap ? std::size_t{1} : workspace_words(k, r);
  };
  auto layout_fits = [&](std::size_t k, std::size_t& c1, std::size_t& c2) {
    c1 = buf::RestorableBuffer::cells_for(slots(params.stage1_aux, k, 2), w);
    c2 = buf::RestorableBuffer::cells_for(slots(params.stage2_aux, k, 3), w);
    return c1 < n && c2 <= n - c1;
  };

  std::size_t k = params.chunk ? params.chunk : default_chunk(n);
  std::size_t c1 = 0, c2 = 0;
  if (!params.chunk) {
    // Shrink the chunk until both buffers take at most an eighth of the input.
    while (k > 1 && (!layout_fits(k, c1, c2) || c1 > n / 8 || c2 > n / 8)) k /= 2;
  }
  st.chunk = k;
  if (n < 2 || !layout_fits(k, c1, c2)) {
    st.fallback = true;
    parallel_knuth_shuffle(a, 1, std::max<std::size_t>(n, 1), seed);
    return st;
  }
  const std::size_t s1 = slots(params.stage1_aux, k, 2);
  const std::size_t s2 = slots(params.stage2_aux, k, 3);
  if (!heap) {
    require(s1 >= workspace_words(k, 2) && s2 >= workspace_words(k, 3),
            "aux slots too few for the workspace");
  }
  st.stage1_cells = c1;
  st.stage2_cells = c2;
  const std::size_t p = n - c1;
  st.stage2_swaps = c1;

  std::vector<word> heap_ws;
  auto workspace = [&](word* cells, std::size_t s, unsigned r) {
    if (!heap) return buf::MaskedWords(cells, s, w);
    heap_ws.assign(workspace_words(k, r), 0);
    return buf::MaskedWords(heap_ws.data(), heap_ws.size(), 64);
  };

  // Stage 1: suffix buffer feeds a chunked shuffle of the prefix.
  const buf::RestorableBuffer b1{p, s1, w, false};
  buf::buffer_init(a, b1);
  if (p > 1)
    run_plain(a, 1, p, k, SeedTarget{seed}, workspace(a.data() + p, s1, 2));
  buf::buffer_restore(a, b1);

  // Stage 2: prefix adjustable buffer, remaining swaps for ids [p, n).
  const buf::RestorableBuffer b2{0, s2, w, true};
  buf::buffer_init(a, b2);
  {
    BufferedPolicy policy{a, b2, seed};
    Engine<BufferedPolicy> engine(workspace(a.data(), s2, 3), k, n, policy);
    engine.run(p, n);
  }
  buf::buffer_restore(a, b2);

  par::for_each(0, b2.enc_len() / 2, kGrain, [&](std::size_t q) {
    const std::size_t c = b2.enc_start() + 2 * q;
    if (rng::coin(seed, rng::Stream::encoder, c)) std::swap(a[c], a[c + 1]);
  });
  return st;
}

void uniform_encoder_apply(std::span<word> a, const EncoderSpec& spec,
                           std::uint64_t seed) {
  std::vector<std::size_t> cells;
  cells.reserve(2 * spec.size());
  for (const auto& [x, y] : spec) {
    require(x < a.size() && y < a.size(), "encoder pair out of range");
    cells.push_back(x);
    cells.push_back(y);
  }
  std::sort(cells.begin(), cells.end());
  require(std::adjacent_find(cells.begin(), cells.end()) == cells.end(),
          "encoder pairs overlap");
  par::for_each(0, spec.size(), kGrain, [&](std::size_t q) {
    if (rng::coin(seed, rng::Stream::encoder, q))
      std::swap(a[spec[q].first], a[spec[q].second]);
  });
}

double chi_square_uniform_p(std::span<const std::uint64_t> counts) {
  require(counts.size() >= 2, "need at least two bins");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  require(total > 0, "no samples");
  const double expected = total / double(counts.size());
  double stat = 0;
  for (const auto c : counts) stat += (double(c) - expected) * (double(c) - expected) / expected;
  const boost::math::chi_squared dist(double(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace pip::shuffle
