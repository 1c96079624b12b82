#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <vector>

#include "checks.hpp"
#include "pip/alloc_stats.hpp"
#include "pip/buffers.hpp"
#include "pip/encoding.hpp"
#include "pip/merge.hpp"
#include "pip/parallel.hpp"
#include "pip/reference.hpp"
#include "pip/shuffle.hpp"
#include "pip/workload.hpp"

namespace pip::acceptance {

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<word> shuffled_distinct(rng::SplitMix& g, std::size_t n, word bound) {
  std::vector<word> v(n);
  word x = g.below(1000);
  const word step = std::max<word>(2, bound / (n + 1));
  for (auto& e : v) e = (x += 1 + g.below(step - 1));
  std::shuffle(v.begin(), v.end(), g);
  return v;
}

// Lexicographic rank of a permutation of 0..n-1.
std::size_t lex_rank(const std::vector<word>& a) {
  std::size_t r = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < a.size(); ++j) smaller += a[j] < a[i];
    r = r * (a.size() - i) + smaller;
  }
  return r;
}

std::size_t factorial(std::size_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

std::vector<word> iota_keys(std::size_t n) {
  std::vector<word> a(n);
  std::iota(a.begin(), a.end(), word{0});
  return a;
}

template <class F>
std::vector<std::uint64_t> outcome_counts(std::size_t n, std::size_t samples,
                                          std::uint64_t seed, F&& run) {
  std::vector<std::uint64_t> counts(factorial(n), 0);
  for (std::size_t s = 0; s < samples; ++s) {
    auto a = iota_keys(n);
    run(a, rng::hash(seed, rng::Stream::generator, n, s));
    ++counts[lex_rank(a)];
  }
  return counts;
}

double uniform_p(const std::vector<std::uint64_t>& counts) {
  double total = 0;
  for (auto x : counts) total += double(x);
  const double e = total / double(counts.size());
  double stat = 0;
  for (auto x : counts) stat += (double(x) - e) * (double(x) - e) / e;
  return chi_square_tail(stat, double(counts.size() - 1));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Outcome check_encoding_roundtrip(const Ctx& c) {
  rng::SplitMix g(c.seed(1));
  Tally t;
  for (std::size_t it = 0; it < 10000; ++it) {
    const std::size_t size = 2 + g.below(63);
    const std::size_t pairs = size / 2;
    auto v = shuffled_distinct(g, size, word{1} << 40);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const std::uint64_t x = g.below(std::uint64_t{1} << pairs);
    enc::write_block({v}, 0, 2 * pairs, x);
    std::uint64_t seen = 0;
    for (std::size_t p = 0; p < pairs; ++p) seen |= std::uint64_t(v[2 * p] > v[2 * p + 1]) << p;
    auto after = v;
    std::sort(after.begin(), after.end());
    t.check(enc::read_block({v}, 0, 2 * pairs) == x && seen == x && after == sorted,
            "block of " + std::to_string(size) + " cells, value " + std::to_string(x));
  }
  return {t.ok(), t.summary("roundtrips, block sizes 2-64")};
}

Outcome check_perm_rank(const Ctx&) {
  Tally t;
  for (unsigned k = 1; k <= 8; ++k) {
    enc::PermUnit pu(k);
    const std::uint64_t kf = pu.factorial(k);
    std::vector<char> hit(kf, 0);
    std::vector<unsigned> pi(k);
    std::iota(pi.begin(), pi.end(), 1u);
    do {
      const std::uint64_t r = pu.rank(pi);
      const bool fresh = r < kf && !hit[r];
      if (r < kf) hit[r] = 1;
      t.check(fresh && pu.unrank(r) == pi, "k=" + std::to_string(k) + " unrank(rank(pi)) != pi");
      if (k <= 6) t.check(ref::ref_perm_rank(pi) == r, "k=" + std::to_string(k) + " differs from enumeration");
    } while (std::next_permutation(pi.begin(), pi.end()));
    for (std::uint64_t r = 0; r < kf; ++r)
      t.check(pu.rank(pu.unrank(r)) == r, "k=" + std::to_string(k) + " rank(unrank(r)) != r");
  }
  t.check(enc::perm_rank(std::vector<unsigned>{1}) == 0, "r([1]) != 0");
  t.check(enc::perm_rank(std::vector<unsigned>{3, 1, 2}) == 4, "r([3,1,2]) != 4");
  t.check(enc::perm_rank(std::vector<unsigned>{5, 4, 3, 2, 1}) == 119, "r([5,4,3,2,1]) != 119");
  return {t.ok(), t.summary("checks over k <= 8 plus anchors")};
}

Outcome check_buffer_identity(const Ctx& c) {
  rng::SplitMix g(c.seed(3));
  Tally t;
  const std::size_t ss[] = {1, 2, 3, 5, 8};
  const unsigned ws[] = {1, 7, 32, 63, 64};
  std::size_t adjustable_runs = 0;
  for (int rep = 0; rep < 20; ++rep)
    for (std::size_t s : ss)
      for (unsigned w : ws)
        for (bool adj : {false, true}) {
          const std::size_t lead = g.below(5);
          const buf::RestorableBuffer b{lead, s, w, adj};
          auto a = shuffled_distinct(g, b.end() + g.below(5), word{1} << 60);
          for (std::size_t q = b.enc_start(); q < b.end(); q += 2)
            if (a[q] > a[q + 1]) std::swap(a[q], a[q + 1]);
          const auto orig = a;
          const std::string tag = "s=" + std::to_string(s) + " w=" + std::to_string(w) +
                                  (adj ? " adjustable" : " plain");
          if (!adj) {
            buf::buffer_init(a, b);
            // Workspace use clobbers the low bits only.
            for (std::size_t q = 0; q < s; ++q)
              a[lead + q] = (g.next() & b.low_mask()) | (orig[lead + q] & ~b.low_mask());
            buf::buffer_restore(a, b);
            t.check(a == orig, tag);
            continue;
          }
          ++adjustable_runs;
          // Model: aux values and the exact cell order of every pair.
          std::vector<word> want(orig.begin() + lead, orig.begin() + lead + s);
          auto model = orig;
          auto order_pair = [&](std::size_t first) {
            const std::size_t rel = (first - b.enc_start()) / 2;
            const bool bit = (want[rel / w] >> (rel % w)) & 1;
            if ((model[first] > model[first + 1]) != bit) std::swap(model[first], model[first + 1]);
          };
          for (std::size_t q = b.enc_start(); q < b.end(); q += 2) order_pair(q);
          buf::AdjustableBuffer ab(a, b);
          ab.init();
          bool ok = true;
          word fresh = word{1} << 62;
          for (int op = 0; op < 40; ++op) {
            if (g.below(2)) {
              const std::size_t q = g.below(s);
              want[q] = g.next() >> 2;
              ab.write(q, want[q]);
              for (std::size_t p = 0; p < w; ++p) order_pair(b.enc_start() + 2 * (w * q + p));
            } else {
              const std::size_t cell = b.enc_start() + g.below(b.enc_len());
              ab.encoding_write(cell, fresh);
              model[cell] = fresh++;
              order_pair(cell - ((cell - b.enc_start()) & 1));
            }
            const std::size_t q = g.below(s);
            ok = ok && ab.read(q) == want[q];
          }
          ab.restore();
          for (std::size_t q = 0; q < s; ++q) model[lead + q] = want[q];
          for (std::size_t q = b.enc_start(); q < b.end(); q += 2)
            if (model[q] > model[q + 1]) std::swap(model[q], model[q + 1]);
          t.check(ok && a == model && ab.violations() == 0, tag);
        }
  return {t.ok(), t.summary("arrays (" + std::to_string(adjustable_runs) + " adjustable)")};
}

Outcome check_merge_correctness(const Ctx& c) {
  rng::SplitMix g(c.seed(4));
  Tally sorted_ok, heap_ok;
  const std::size_t iters = c.pick(10000, 600);
  const double top = std::log(100001.0);
  auto draw = [&](std::size_t it) -> std::size_t {
    if (it % 50 == 0) return 100000;
    const double u = double(g.next() >> 11) / 9007199254740992.0;
    return std::min<std::size_t>(100000, std::size_t(std::exp(u * top)) - 1);
  };
  std::size_t worst_words = 0, worst_b = 0;
  for (std::size_t it = 0; it < iters; ++it) {
    const std::size_t na = draw(it), nb = draw(it + 1);
    std::vector<word> a, b;
    workload::sorted_pair(g, na, nb, a, b);
    std::vector<word> data = a;
    data.insert(data.end(), b.begin(), b.end());
    merge::Options opts;
    opts.seed = g.next();
    alloc::Window w;
    const auto st = merge::merge(data, na, opts);
    const std::size_t used = w.heap_peak_delta();
    const std::string tag = "na=" + std::to_string(na) + " nb=" + std::to_string(nb);
    heap_ok.check(used <= (4 * st.block_size + 16) * sizeof(word), tag + " heap " + std::to_string(used));
    if (used > worst_words * sizeof(word)) {
      worst_words = used / sizeof(word);
      worst_b = st.block_size;
    }
    sorted_ok.check(data == ref::ref_merge(a, b), tag);
  }
  const bool hooked = alloc::hook_installed();
  return {sorted_ok.ok() && heap_ok.ok() && hooked,
          sorted_ok.summary("merges equal ref_merge") + "; " + heap_ok.summary("within 4b+16 words") +
              "; worst " + std::to_string(worst_words) + " words at b=" + std::to_string(worst_b) +
              (hooked ? "" : "; allocation hook missing")};
}

Outcome check_round_bound(const Ctx& c) {
  const unsigned top = c.full() ? 16 : 12;
  const std::size_t trials = c.pick(100, 20);
  std::string detail;
  bool pass = true;
  std::vector<word> data;
  for (unsigned e = 10; e <= top; ++e) {
    const std::size_t N = std::size_t{1} << e;
    merge::Options opts;
    std::size_t b = 8 * std::bit_width(N) + 7;
    merge::Layout l;
    for (;; ++b) {
      try {
        l = merge::Layout::make(b, N, opts);
        break;
      } catch (const ContractViolation&) {
      }
    }
    const std::size_t bound = 2 * e + 2;
    std::size_t within = 0, worst = 0, sum = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      rng::SplitMix g(c.seed(5000 + e * 1000 + trial));
      const std::size_t na = N / 2 * b, total = N * b;
      data.resize(total);
      // Random interleave of two runs over the keys 1..total.
      std::size_t ra = na, rb = total - na, ia = 0, ib = na;
      for (std::size_t k = 0; k < total; ++k) {
        if (g.below(ra + rb) < ra) {
          data[ia++] = k + 1;
          --ra;
        } else {
          data[ib++] = k + 1;
          --rb;
        }
      }
      opts.seed = g.next();
      const auto plan = merge::align_inputs(na, total - na, b);
      merge::Blocks x(data.data(), plan, b, nullptr, nullptr);
      merge::compute_block_metadata(x, l, opts);
      const std::size_t rounds = merge::end_merge(x, l, opts);
      within += rounds <= bound;
      worst = std::max(worst, rounds);
      sum += rounds;
    }
    const bool ok = within * 100 >= trials * 99;
    pass = pass && ok;
    char line[160];
    std::snprintf(line, sizeof line, "%sN=2^%u: %zu/%zu <= %zu (max %zu, mean %.1f)",
                  detail.empty() ? "" : "; ", e, within, trials, bound, worst,
                  double(sum) / double(trials));
    detail += line;
  }
  return {pass, detail};
}

Outcome check_inversion_discipline(const Ctx& c) {
  rng::SplitMix g(c.seed(6));
  Tally t;
  const std::size_t iters = c.pick(1000, 200);
  for (std::size_t it = 0; it < iters; ++it) {
    merge::Options opts;
    opts.seed = g.next();
    opts.precomputed_coins = g.below(2);
    opts.round_cap = g.below(2);
    opts.cache_target = g.below(2);
    const std::size_t ab = 1 + g.below(32), bb = 1 + g.below(32);
    const std::size_t b = merge::default_block_size((ab + bb) * 64, opts);
    std::vector<word> a, bv;
    workload::sorted_pair(g, ab * b, bb * b, a, bv);
    a.insert(a.end(), bv.begin(), bv.end());
    const auto plan = merge::align_inputs(ab * b, bb * b, b);
    const auto l = merge::Layout::make(b, plan.blocks(), opts);
    merge::Blocks x(a.data(), plan, b, nullptr, nullptr);
    merge::compute_block_metadata(x, l, opts);
    merge::end_merge(x, l, opts);
    const std::size_t n = x.count();
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const std::size_t partner = std::min<std::size_t>(n - 1, l.inv.read(x[i]));
      for (std::size_t j = i + 1; j < n; ++j) {
        const word mn = *std::min_element(x[j], x[j] + b);
        if (x.endpoint(i) > mn && j != partner) {
          ok = false;
          break;
        }
      }
    }
    t.check(ok, std::to_string(ab) + "+" + std::to_string(bb) + " blocks");
  }
  return {t.ok(), t.summary("instances")};
}

Outcome check_shuffle_uniformity(const Ctx& c) {
  using namespace pip::shuffle;
  Tally t;
  double worst = 1;
  std::string worst_name;
  auto judge = [&](const std::string& name, const std::vector<std::uint64_t>& counts) {
    const double p = uniform_p(counts);
    if (p < worst) {
      worst = p;
      worst_name = name;
    }
    t.check(p > 1e-3, name + " p=" + fmt("%.2g", p));
  };
  BufferedParams tiny;
  tiny.chunk = 1;
  tiny.word_bits = 1;
  tiny.stage1_aux = 1;
  tiny.stage2_aux = 1;
  tiny.heap_workspace = true;
  std::size_t in_place_buffered = 0;
  for (std::size_t n : {3, 4, 5}) {
    const std::size_t samples = 120 * factorial(n);
    const std::string at = " n=" + std::to_string(n);
    judge("parallel" + at, outcome_counts(n, samples, c.seed(70 + n), [&](auto& a, auto s) {
            parallel_knuth_shuffle(a, 0, n, s);
          }));
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, n})
      judge("chunked k=" + std::to_string(k) + at,
            outcome_counts(n, samples, c.seed(71 + n * 10 + k), [&](auto& a, auto s) {
              chunked_shuffle(a, k, s);
            }));
  }
  // Both buffers need 2(1 + 2) cells at the smallest parameters, so n < 6
  // falls back to the parallel shuffle; n = 6 runs both stages in place.
  for (std::size_t n : {3, 4, 5, 6}) {
    const std::size_t samples = 120 * factorial(n);
    judge("buffered n=" + std::to_string(n),
          outcome_counts(n, samples, c.seed(79 + n), [&](auto& a, auto s) {
            in_place_buffered += !buffered_shuffle(a, s, tiny).fallback;
          }));
  }
  t.check(in_place_buffered == 120 * 720, "buffered n=6 fell back");

  rng::SplitMix g(c.seed(7));
  Tally replay;
  for (std::size_t it = 0; it < 1000; ++it) {
    const std::size_t n = 1 + g.below(1000);
    std::vector<std::size_t> h(n);
    std::vector<std::uint64_t> h64(n);
    for (std::size_t i = 0; i < n; ++i) h64[i] = h[i] = g.below(i + 1);
    const auto base = iota_keys(n);
    auto want = base;
    ref::ref_knuth_apply(want, h64, 0, n - 1);
    auto x = base;
    parallel_knuth_shuffle(x, 0, n, h);
    auto y = base;
    const std::size_t k = 1 + g.below(n);
    chunked_shuffle(y, k, h);
    replay.check(x == want && y == want, "n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  return {t.ok() && replay.ok(),
          t.summary("distributions with p > 1e-3") + " (min p " + fmt("%.3g", worst) + " " +
              worst_name + "); " + replay.summary("fixed-target replays")};
}

Outcome check_swap_order(const Ctx& c) {
  const std::size_t n = 4, samples = 100000;
  const std::uint64_t sd = c.seed(81), sa = c.seed(82);
  // Descending: the library's order (ids n-1 down to 0).
  const auto down = outcome_counts(n, samples, sd, [&](auto& a, auto s) {
    shuffle::parallel_knuth_shuffle(a, 0, n, s);
  });
  // Ascending: the same swap law applied from id 1 up.
  const auto up = outcome_counts(n, samples, sa, [&](auto& a, auto s) {
    for (std::size_t i = 1; i < n; ++i) std::swap(a[i], a[shuffle::target(s, i)]);
  });
  double stat = 0;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < down.size(); ++k) {
    const double x = double(down[k]), y = double(up[k]);
    if (x + y == 0) continue;
    stat += (x - y) * (x - y) / (x + y);
    ++cells;
  }
  const double p = chi_square_tail(stat, double(cells) - 1);
  return {p > 1e-3, "homogeneity p=" + fmt("%.3g", p) + " over " + std::to_string(cells) +
                        " outcomes; uniform p descending " + fmt("%.3g", uniform_p(down)) +
                        ", ascending " + fmt("%.3g", uniform_p(up))};
}

Outcome check_inplace_accounting(const Ctx& c) {
  const std::size_t n = c.pick(10000000, 1000000);
  rng::SplitMix g(c.seed(13));
  std::vector<word> a, b;
  workload::sorted_pair(g, n / 2, n - n / 2, a, b);
  std::vector<word> data = a;
  data.insert(data.end(), b.begin(), b.end());
  const double bytes = double(n * sizeof(word));
  std::size_t merge_heap;
  {
    alloc::Window w;
    merge::merge(data, a.size());
    merge_heap = w.heap_peak_delta();
  }
  const bool merge_ok = data == ref::ref_merge(a, b);
  a.clear();
  a.shrink_to_fit();
  b.clear();
  b.shrink_to_fit();
  // data is sorted and distinct; shuffle it and compare the multiset.
  std::size_t shuffle_heap;
  shuffle::BufferedStats st;
  {
    alloc::Window w;
    st = shuffle::buffered_shuffle(data, c.seed(14));
    shuffle_heap = w.heap_peak_delta();
  }
  const bool moved = !std::is_sorted(data.begin(), data.end());
  std::sort(data.begin(), data.end());
  bool multiset_ok = std::adjacent_find(data.begin(), data.end()) == data.end() &&
                     data.size() == n;
  const double mp = 100.0 * double(merge_heap) / bytes;
  const double sp = 100.0 * double(shuffle_heap) / bytes;
  const bool pass = alloc::hook_installed() && merge_ok && moved && multiset_ok &&
                    !st.fallback && mp < 1.0 && sp < 1.0;
  return {pass, "n=" + std::to_string(n) + ": merge heap " + fmt("%.4f", mp) + "% (" +
                    std::to_string(merge_heap) + " B), shuffle heap " + fmt("%.4f", sp) + "% (" +
                    std::to_string(shuffle_heap) + " B)" + (merge_ok ? "" : "; merge wrong") +
                    (moved && multiset_ok ? "" : "; shuffle output wrong") +
                    (st.fallback ? "; shuffle fell back" : "")};
}

Outcome check_parallel_smoke(const Ctx& c) {
  const std::size_t n = c.pick(50000000, 5000000);
  const std::size_t hw = par::hardware_threads();
  std::vector<word> src;
  std::size_t na;
  {
    rng::SplitMix g(c.seed(14));
    std::vector<word> b;
    workload::sorted_pair(g, n / 2, n - n / 2, src, b);
    na = src.size();
    src.insert(src.end(), b.begin(), b.end());
  }
  auto timed = [&](std::size_t threads, bool& sorted) {
    std::vector<word> data = src;
    par::ThreadLimit limit(threads);
    const auto t0 = std::chrono::steady_clock::now();
    merge::merge(data, na);
    const double s = seconds_since(t0);
    sorted = std::is_sorted(data.begin(), data.end());
    return s;
  };
  bool s1 = false, s8 = false;
  const double t1 = timed(1, s1);
  const double t8 = timed(8, s8);
  const double speedup = t1 / t8;
  Outcome o;
  o.pass = s1 && s8 && speedup >= 2.0;
  o.informational = hw < 8 && s1 && s8;
  o.detail = "n=" + std::to_string(n) + ": speedup " + fmt("%.2f", speedup) + "x (1 thread " +
             fmt("%.2f", t1) + " s, 8 threads " + fmt("%.2f", t8) + " s); " +
             std::to_string(hw) + " hardware threads" + (s1 && s8 ? "" : "; output not sorted");
  return o;
}

}  // namespace pip::acceptance
