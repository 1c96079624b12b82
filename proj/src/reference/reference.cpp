#include "pip/reference.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>
#include <utility>

namespace pip::ref {

std::vector<std::uint64_t> ref_merge(const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b) {
  std::vector<std::uint64_t> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (b[j] < a[i]) out.push_back(b[j++]);
    else out.push_back(a[i++]);
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return out;
}

void ref_knuth_apply(std::vector<std::uint64_t>& a,
                     const std::vector<std::uint64_t>& h, std::size_t lo,
                     std::size_t hi) {
  for (std::size_t i = hi + 1; i-- > lo;) {
    if (h[i] > i) throw std::invalid_argument("target above index");
    std::swap(a[i], a[h[i]]);
  }
}

std::vector<std::uint64_t> ref_shuffle(std::vector<std::uint64_t> a,
                                       std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = a.size(); i-- > 1;) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(a[i], a[pick(gen)]);
  }
  return a;
}

void ref_check_graph(std::uint64_t n, const std::vector<graph::Edge>& edges) {
  std::vector<int> degree(n + 1, 0);
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (const auto& e : edges) {
    if (e.u < 1 || e.u > n || e.v < 1 || e.v > n)
      throw std::invalid_argument("endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self loop");
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second)
      throw std::invalid_argument("parallel edge");
    ++degree[e.u];
    ++degree[e.v];
  }
  for (std::uint64_t v = 1; v <= n; ++v)
    if (degree[v] == 0) throw std::invalid_argument("isolated vertex");
}

namespace {

struct DisjointSets {
  std::vector<std::uint64_t> parent;
  explicit DisjointSets(std::uint64_t n) : parent(n + 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::uint64_t find(std::uint64_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::uint64_t a, std::uint64_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

std::set<graph::EdgeKey> ref_kruskal(std::uint64_t n,
                                     const std::vector<graph::Edge>& edges) {
  std::vector<graph::EdgeKey> keys;
  keys.reserve(edges.size());
  for (const auto& e : edges) keys.emplace_back(e);
  std::sort(keys.begin(), keys.end());
  DisjointSets ds(n);
  std::set<graph::EdgeKey> out;
  for (const auto& k : keys)
    if (ds.unite(k.lo, k.hi)) out.insert(k);
  return out;
}

std::vector<std::uint64_t> ref_components(
    std::uint64_t n, const std::vector<graph::Edge>& edges) {
  ref_check_graph(n, edges);
  std::vector<std::vector<std::uint64_t>> adj(n + 1);
  for (const auto& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<std::uint64_t> label(n + 1, 0);
  for (std::uint64_t s = 1; s <= n; ++s) {
    if (label[s] != 0) continue;
    std::queue<std::uint64_t> q;
    q.push(s);
    label[s] = s;
    while (!q.empty()) {
      const std::uint64_t x = q.front();
      q.pop();
      for (std::uint64_t y : adj[x])
        if (label[y] == 0) {
          label[y] = s;
          q.push(y);
        }
    }
  }
  return label;
}

std::optional<graph::vertex> ref_prim_first_center(
    std::uint64_t n, const std::vector<graph::Edge>& edges,
    const std::vector<bool>& is_center, graph::vertex u) {
  std::vector<std::vector<std::pair<graph::vertex, graph::weight>>> adj(n + 1);
  for (const auto& e : edges) {
    adj[e.u].emplace_back(e.v, e.w);
    adj[e.v].emplace_back(e.u, e.w);
  }
  using Entry = std::pair<graph::EdgeKey, graph::vertex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  std::vector<bool> done(n + 1, false);
  pq.emplace(graph::EdgeKey{}, u);
  while (!pq.empty()) {
    const graph::vertex p = pq.top().second;
    pq.pop();
    if (done[p]) continue;
    done[p] = true;
    if (is_center[p]) return p;
    for (const auto& [r, w] : adj[p])
      if (!done[r]) pq.emplace(graph::EdgeKey(p, r, w), r);
  }
  return std::nullopt;
}

std::vector<graph::vertex> ref_clusters(std::uint64_t n,
                                        const std::vector<graph::Edge>& edges,
                                        const std::vector<bool>& is_center) {
  std::vector<graph::vertex> cluster(n + 1, 0);
  for (graph::vertex u = 1; u <= n; ++u)
    cluster[u] = ref_prim_first_center(n, edges, is_center, u).value_or(0);
  return cluster;
}

std::set<graph::EdgeKey> ref_cluster_msf(std::uint64_t n,
                                         const std::vector<graph::Edge>& edges,
                                         const std::vector<bool>& is_center) {
  const auto cluster = ref_clusters(n, edges, is_center);
  std::vector<graph::Edge> cut;
  for (const auto& e : edges)
    if (cluster[e.u] != 0 && cluster[e.u] != cluster[e.v]) cut.push_back(e);
  std::sort(cut.begin(), cut.end(), [](const graph::Edge& a, const graph::Edge& b) {
    return graph::EdgeKey(a) < graph::EdgeKey(b);
  });
  DisjointSets ds(n);
  std::set<graph::EdgeKey> out;
  for (const auto& e : cut)
    if (ds.unite(cluster[e.u], cluster[e.v])) out.insert(graph::EdgeKey(e));
  return out;
}

std::uint64_t ref_perm_rank(const std::vector<unsigned>& pi) {
  if (pi.empty() || pi.size() > 8) throw std::invalid_argument("k must be 1..8");
  std::vector<unsigned> cur(pi.size());
  std::iota(cur.begin(), cur.end(), 1u);
  std::uint64_t index = 0;
  do {
    if (cur == pi) return index;
    ++index;
  } while (std::next_permutation(cur.begin(), cur.end()));
  throw std::invalid_argument("not a permutation");
}

}  // namespace pip::ref
