#include <algorithm>
#include <atomic>
#include <bit>
#include <tuple>

#include "pip/graph.hpp"
#include "pip/parallel.hpp"
#include "pip/random.hpp"
#include "pip/scratch.hpp"

namespace pip::graph {

namespace {

constexpr std::size_t kNone = ~std::size_t{0};

struct Item {
  weight w;
  vertex lo, hi;
  vertex v;  // frontier vertex; the other endpoint is its tree parent

  vertex parent() const { return lo == v ? hi : lo; }
  EdgeKey key() const {
    EdgeKey k;
    k.w = w;
    k.lo = lo;
    k.hi = hi;
    return k;
  }
};

bool less(const Item& a, const Item& b) {
  return std::tie(a.w, a.lo, a.hi) < std::tie(b.w, b.lo, b.hi);
}

// Linear-probing map vertex -> heap slot with backward-shift deletion.
class SlotMap {
 public:
  SlotMap(word* keys, word* vals, std::size_t cap)
      : keys_(keys), vals_(vals), mask_(cap - 1) {
    std::fill(keys_, keys_ + cap, 0);
  }

  std::size_t find(vertex v) const {
    for (std::size_t i = home(v);; i = (i + 1) & mask_) {
      if (keys_[i] == v) return vals_[i];
      if (keys_[i] == 0) return kNone;
    }
  }
  void set(vertex v, std::size_t slot) {
    std::size_t i = home(v);
    while (keys_[i] != 0 && keys_[i] != v) i = (i + 1) & mask_;
    keys_[i] = v;
    vals_[i] = slot;
  }
  void erase(vertex v) {
    std::size_t i = home(v);
    while (keys_[i] != v) i = (i + 1) & mask_;
    for (std::size_t j = (i + 1) & mask_; keys_[j] != 0; j = (j + 1) & mask_) {
      const std::size_t k = home(keys_[j]);
      // Move j back into the hole unless its home lies cyclically in (i, j].
      const bool stays = i <= j ? (i < k && k <= j) : (i < k || k <= j);
      if (stays) continue;
      keys_[i] = keys_[j];
      vals_[i] = vals_[j];
      i = j;
    }
    keys_[i] = 0;
  }

 private:
  std::size_t home(vertex v) const { return rng::mix(v) & mask_; }
  word* keys_;
  word* vals_;
  std::size_t mask_;
};

class VisitedSet {
 public:
  VisitedSet(word* keys, std::size_t cap) : keys_(keys), mask_(cap - 1) {
    std::fill(keys_, keys_ + cap, 0);
  }
  bool contains(vertex v) const {
    for (std::size_t i = rng::mix(v) & mask_;; i = (i + 1) & mask_) {
      if (keys_[i] == v) return true;
      if (keys_[i] == 0) return false;
    }
  }
  void insert(vertex v) {
    std::size_t i = rng::mix(v) & mask_;
    while (keys_[i] != 0 && keys_[i] != v) i = (i + 1) & mask_;
    keys_[i] = v;
  }

 private:
  word* keys_;
  std::size_t mask_;
};

// Min-max heap over Items; even levels hold minima, odd levels maxima. Every
// move is mirrored in the slot map so entries can be removed by vertex.
class MinMaxHeap {
 public:
  MinMaxHeap(Item* h, SlotMap& pos) : h_(h), pos_(pos) {}

  std::size_t size() const { return n_; }
  const Item& at(std::size_t i) const { return h_[i]; }

  void push(const Item& x) {
    h_[n_] = x;
    pos_.set(x.v, n_);
    fix(n_++);
  }
  Item pop_min() { return erase(0); }
  Item pop_max() {
    std::size_t i = 0;
    if (n_ > 1) i = 1;
    if (n_ > 2 && less(h_[1], h_[2])) i = 2;
    return erase(i);
  }
  Item erase(std::size_t i) {
    const Item out = h_[i];
    pos_.erase(out.v);
    --n_;
    if (i != n_) {
      h_[i] = h_[n_];
      pos_.set(h_[i].v, i);
      fix(i);
    }
    return out;
  }

 private:
  static bool min_level(std::size_t i) { return (std::bit_width(i + 1) - 1) % 2 == 0; }

  void swap(std::size_t a, std::size_t b) {
    std::swap(h_[a], h_[b]);
    pos_.set(h_[a].v, a);
    pos_.set(h_[b].v, b);
  }

  // a goes before b on a min (mn) or max level.
  bool before(std::size_t a, std::size_t b, bool mn) const {
    return mn ? less(h_[a], h_[b]) : less(h_[b], h_[a]);
  }

  // Restores the heap after the entry at i changed arbitrarily.
  void fix(std::size_t i) {
    const bool mn = min_level(i);
    if (i > 0) {
      const std::size_t p = (i - 1) / 2;
      if (before(p, i, mn)) {
        // Belongs on the other level type; the parent's entry comes down.
        swap(i, p);
        bubble_grand(p, !mn);
        trickle_down(i);
        return;
      }
    }
    if (!bubble_grand(i, mn)) trickle_down(i);
  }

  bool bubble_grand(std::size_t i, bool mn) {
    bool moved = false;
    while (i >= 3) {
      const std::size_t g = ((i - 1) / 2 - 1) / 2;
      if (!before(i, g, mn)) break;
      swap(i, g);
      i = g;
      moved = true;
    }
    return moved;
  }

  void trickle_down(std::size_t i) {
    const bool mn = min_level(i);
    for (;;) {
      const std::size_t c1 = 2 * i + 1;
      if (c1 >= n_) return;
      std::size_t m = c1;
      const std::size_t cands[5] = {c1 + 1, 2 * c1 + 1, 2 * c1 + 2, 2 * c1 + 3,
                                    2 * c1 + 4};
      for (std::size_t t : cands)
        if (t < n_ && before(t, m, mn)) m = t;
      if (!before(m, i, mn)) return;
      swap(m, i);
      if (m <= c1 + 1) return;
      const std::size_t p = (m - 1) / 2;
      if (before(p, m, mn)) swap(m, p);
      i = m;
    }
  }

  Item* h_;
  SlotMap& pos_;
  std::size_t n_ = 0;
};

struct SearchOut {
  std::optional<vertex> center;
  std::size_t visited = 0;
  std::size_t tree_len = 0;
  vertex min_label = 0;
  bool threshold_set = false;
  EdgeKey threshold;
  bool exhausted = false;
};

// One bounded search. tree, when given, has room for L + 1 edges.
SearchOut search(const Codec& c, vertex u, std::size_t L, Edge* tree) {
  const CsrGraph& g = c.graph();
  const std::size_t heap_cap = L + 2;
  const std::size_t map_cap = std::bit_ceil(4 * heap_cap);
  const std::size_t set_cap = std::bit_ceil(2 * heap_cap);
  scratch::Lease<Item> items(heap_cap);
  scratch::Lease<word> map_words(2 * map_cap);
  scratch::Lease<word> set_words(set_cap);
  SlotMap pos(map_words.data(), map_words.data() + map_cap, map_cap);
  VisitedSet seen(set_words.data(), set_cap);
  MinMaxHeap q(items.data(), pos);

  SearchOut out;
  out.min_label = u;
  auto lower_t = [&](const EdgeKey& k) {
    if (!out.threshold_set || k < out.threshold) out.threshold = k;
    out.threshold_set = true;
  };
  auto below_t = [&](const EdgeKey& k) { return !out.threshold_set || k < out.threshold; };

  q.push(Item{0, 0, 0, u});
  bool stalled = false;
  while (q.size() > 0 && out.visited <= L) {
    const Item top = q.pop_min();
    if (top.v != u && !below_t(top.key())) {
      // Entries at or past the threshold may be out of Prim order.
      stalled = true;
      break;
    }
    const vertex p = top.v;
    seen.insert(p);
    ++out.visited;
    out.min_label = std::min(out.min_label, p);
    if (p != u && tree) tree[out.tree_len++] = Edge{top.parent(), p, top.w};
    if (c.is_center(p)) {
      out.center = p;
      return out;
    }
    const word lo = c.offset(p - 1);
    const std::size_t d = c.offset(p) - lo;
    const std::size_t lim = std::min(d, L);
    for (std::size_t k = 0; k < lim; ++k) {
      const vertex r = g.neighbor(lo + k);
      const EdgeKey key(p, r, g.edge_weight(lo + k));
      if (!below_t(key)) break;  // lists are sorted, so the rest are larger
      if (seen.contains(r)) continue;
      const Item it{key.w, key.lo, key.hi, r};
      const std::size_t at = pos.find(r);
      if (at != kNone) {
        if (!less(it, q.at(at))) continue;
        q.erase(at);
      }
      q.push(it);
      if (q.size() > L) lower_t(q.pop_max().key());
    }
    if (lim < d) lower_t(EdgeKey(p, g.neighbor(lo + lim), g.edge_weight(lo + lim)));
  }
  out.exhausted = !stalled && q.size() == 0 && !out.threshold_set;
  return out;
}

CenterSearchResult to_result(const SearchOut& s, const Edge* tree) {
  CenterSearchResult r;
  r.center = s.center;
  r.visited = s.visited;
  r.min_label = s.min_label;
  if (s.threshold_set) r.threshold = s.threshold;
  r.exhausted = s.exhausted;
  if (tree) r.tree_edges.assign(tree, tree + s.tree_len);
  return r;
}

constexpr unsigned kMaxIterations = 48;

// Doubling driver without tree recording.
std::optional<vertex> locate(const Codec& c, vertex u, unsigned c_prime,
                             unsigned& iterations) {
  for (unsigned k = 0; k < kMaxIterations; ++k) {
    iterations = k + 1;
    const auto s = search(c, u, search_limit(c.graph().n(), k, c_prime), nullptr);
    if (s.center || s.exhausted) return s.center;
  }
  throw InvariantError("center search did not settle");
}

}  // namespace

std::size_t search_limit(vertex n, unsigned k, unsigned c_prime) {
  const std::size_t lg = std::max<std::size_t>(1, std::bit_width(n > 0 ? n - 1 : 0));
  return (std::size_t{1} << k) * std::max(1u, c_prime) * lg * lg;
}

CenterSearchResult center_search(const Codec& c, vertex u, unsigned k,
                                 unsigned c_prime) {
  require(u >= 1 && u <= c.graph().n(), "start vertex out of range");
  const std::size_t L = search_limit(c.graph().n(), k, c_prime);
  scratch::Lease<Edge> tree(L + 2);
  const auto s = search(c, u, L, tree.data());
  return to_result(s, tree.data());
}

CenterLookup find_center(const Codec& c, vertex u, unsigned c_prime) {
  CenterLookup out;
  for (unsigned k = 0; k < kMaxIterations; ++k) {
    out.iterations = k + 1;
    out.result = center_search(c, u, k, c_prime);
    if (out.result.center || out.result.exhausted) return out;
  }
  throw InvariantError("center search did not settle");
}

std::size_t find_root(const Codec& c, std::size_t blk) {
  std::size_t steps = 0;
  while (!c.is_root(blk)) {
    blk = c.parent(blk);
    if (++steps > c.blocks()) throw InvariantError("parent links form a cycle");
  }
  return blk;
}

bool boruvka_round(Codec& c, unsigned c_prime, BuildStats* stats) {
  par::for_each(0, c.blocks(), 64, [&](std::size_t blk) {
    if (c.is_root(blk)) c.clear_slot(blk);
  });
  const CsrGraph& g = c.graph();
  std::atomic<bool> changed{false};
  std::atomic<std::size_t> searches{0}, extra{0};
  par::for_each(1, g.n() + 1, 4, [&](std::size_t i) {
    unsigned it = 0;
    const auto s1 = locate(c, i, c_prime, it);
    std::size_t local_searches = 1, local_extra = it > 1;
    if (s1) {
      const std::size_t r1 = find_root(c, c.block_of(*s1));
      const word lo = c.offset(i - 1), hi = c.offset(i);
      for (word e = lo; e < hi; ++e) {
        const vertex j = g.neighbor(e);
        const auto s2 = locate(c, j, c_prime, it);
        ++local_searches;
        local_extra += it > 1;
        if (!s2 || *s2 == *s1) continue;
        const std::size_t r2 = find_root(c, c.block_of(*s2));
        if (r1 == r2) continue;
        const Edge edge{i, j, g.edge_weight(e)};
        const bool a = c.offer(r1, edge, *s2);
        const bool b = c.offer(r2, edge, *s1);
        if (a || b) changed.store(true, std::memory_order_relaxed);
      }
    }
    searches.fetch_add(local_searches, std::memory_order_relaxed);
    extra.fetch_add(local_extra, std::memory_order_relaxed);
  });
  if (stats) {
    stats->searches += searches.load();
    stats->extra_iterations += extra.load();
  }
  return changed.load();
}

bool forest_contraction_round(Codec& c, std::uint64_t seed, std::size_t round) {
  const std::size_t nb = c.blocks();
  par::for_each(0, nb, 64, [&](std::size_t blk) {
    if (c.is_root(blk))
      c.set_coin(blk, rng::coin(seed, rng::Stream::contraction_coin, blk, round));
  });
  // Decide: only roots' parent fields are written, and find never reads a
  // root's parent, so the pass sees a fixed forest.
  std::atomic<bool> link{false};
  par::for_each(0, nb, 64, [&](std::size_t blk) {
    if (!c.is_root(blk)) return;
    const StoredEdge s = c.stored(blk);
    if (!s.present) return;
    const std::size_t r = find_root(c, c.block_of(s.far_center));
    if (r == blk) return;
    link.store(true, std::memory_order_relaxed);
    if (!c.coin(blk) && c.coin(r)) c.set_parent(blk, r);
  });
  par::for_each(0, nb, 64, [&](std::size_t blk) {
    if (c.is_root(blk) && c.parent(blk) != blk) c.set_root(blk, false);
  });
  return link.load();
}

BuildStats build_oracle(Codec& c, const BuildOptions& opts) {
  BuildStats st;
  sort_adjacency(c.graph());
  c.init(opts.seed, opts.centers.empty() ? nullptr : &opts.centers);
  auto notify = [&](const char* stage) {
    if (opts.observer) opts.observer(c, stage);
  };
  notify("init");
  const std::size_t max_boruvka = 2 * std::bit_width(c.blocks()) + 4;
  for (;;) {
    const bool changed = boruvka_round(c, opts.c_prime, &st);
    ++st.boruvka_rounds;
    notify("boruvka");
    if (!changed) break;
    if (st.boruvka_rounds > max_boruvka) throw InvariantError("Boruvka rounds did not converge");
    for (std::size_t inner = 0;; ++inner) {
      const bool link = forest_contraction_round(c, opts.seed, st.contraction_rounds++);
      notify("contraction");
      if (!link) break;
      if (inner > 4096) throw InvariantError("contraction did not converge");
    }
  }
  return st;
}

namespace {

weight edge_weight_between(const Codec& c, vertex u, vertex v) {
  const vertex n = c.graph().n();
  require(u >= 1 && u <= n && v >= 1 && v <= n, "vertex out of range");
  for (word e = c.offset(u - 1); e < c.offset(u); ++e)
    if (c.graph().neighbor(e) == v) return c.graph().edge_weight(e);
  throw ContractViolation("queried pair is not an edge");
}

bool in_tree(const std::vector<Edge>& tree, const EdgeKey& key) {
  return std::any_of(tree.begin(), tree.end(),
                     [&](const Edge& e) { return EdgeKey(e) == key; });
}

bool on_root_path(const Codec& c, vertex center, const EdgeKey& key) {
  std::size_t blk = c.block_of(center);
  for (std::size_t steps = 0;; ++steps) {
    const StoredEdge s = c.stored(blk);
    if (s.present && EdgeKey(s.edge) == key) return true;
    if (c.is_root(blk)) return false;
    if (steps > c.blocks()) throw InvariantError("parent links form a cycle");
    blk = c.parent(blk);
  }
}

}  // namespace

bool msf_query(const Codec& c, vertex u, vertex v, unsigned c_prime) {
  require(c.initialized(), "oracle not built");
  const EdgeKey key(u, v, edge_weight_between(c, u, v));
  const auto lu = find_center(c, u, c_prime);
  if (!lu.result.center) return in_tree(lu.result.tree_edges, key);
  const auto lv = find_center(c, v, c_prime);
  const vertex su = *lu.result.center;
  const vertex sv = lv.result.center.value_or(0);
  if (su != sv) return on_root_path(c, su, key) || on_root_path(c, sv, key);
  // A cluster-internal MSF edge lies on the Prim path from at least one of
  // its endpoints to the center.
  return in_tree(lu.result.tree_edges, key) || in_tree(lv.result.tree_edges, key);
}

vertex connectivity_query(const Codec& c, vertex v, unsigned c_prime) {
  require(c.initialized(), "oracle not built");
  require(v >= 1 && v <= c.graph().n(), "vertex out of range");
  const auto lv = find_center(c, v, c_prime);
  if (!lv.result.center) return lv.result.min_label;
  return c.center(find_root(c, c.block_of(*lv.result.center)));
}

}  // namespace pip::graph
