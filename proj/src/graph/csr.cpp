#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "pip/graph.hpp"
#include "pip/parallel.hpp"
#include "pip/random.hpp"
#include "pip/scratch.hpp"

namespace pip::graph {

static_assert(std::endian::native == std::endian::little,
              "graph files are written as native little-endian words");

namespace {

constexpr char kMagic[4] = {'P', 'I', 'P', 'G'};
constexpr word kVersion = 1;

void fail(const std::string& what) { throw InputError("graph: " + what); }

}  // namespace

void validate_csr(std::span<const word> I) {
  if (I.empty()) fail("empty array");
  const word n = I[0];
  if (I.size() < 1 + n || (I.size() - 1 - n) % 4 != 0) fail("length is not n + 4m + 1");
  const std::size_t m = (I.size() - 1 - n) / 4;
  word prev = 0;
  for (word p = 1; p <= n; ++p) {
    if (I[p] <= prev) fail("offsets not strictly increasing (degree 0 vertex " + std::to_string(p) + ")");
    prev = I[p];
  }
  if (prev != 2 * m) fail("last offset does not match the entry count");
  std::vector<std::tuple<word, word, word>> dir;
  dir.reserve(2 * m);
  word start = 0;
  for (word p = 1; p <= n; ++p) {
    for (word e = start; e < I[p]; ++e) {
      const word v = I[n + 1 + 2 * e], w = I[n + 2 + 2 * e];
      if (v < 1 || v > n) fail("neighbor out of range");
      if (v == p) fail("self loop at " + std::to_string(p));
      dir.emplace_back(p, v, w);
    }
    start = I[p];
  }
  std::sort(dir.begin(), dir.end());
  for (std::size_t i = 1; i < dir.size(); ++i)
    if (std::get<0>(dir[i]) == std::get<0>(dir[i - 1]) &&
        std::get<1>(dir[i]) == std::get<1>(dir[i - 1]))
      fail("parallel edge");
  for (const auto& [u, v, w] : dir)
    if (!std::binary_search(dir.begin(), dir.end(), std::make_tuple(v, u, w)))
      fail("asymmetric entry " + std::to_string(u) + "-" + std::to_string(v));
}

CsrGraph::CsrGraph(std::vector<word> words) : words_(std::move(words)) {
  validate_csr(words_);
}

CsrGraph CsrGraph::from_edges(vertex n, const std::vector<Edge>& edges) {
  std::vector<word> deg(n + 1, 0);
  for (const auto& e : edges) {
    if (e.u < 1 || e.u > n || e.v < 1 || e.v > n) fail("endpoint out of range");
    if (e.u == e.v) fail("self loop");
    ++deg[e.u];
    ++deg[e.v];
  }
  const std::size_t m = edges.size();
  std::vector<word> I(1 + n + 4 * m);
  I[0] = n;
  word run = 0;
  for (vertex p = 1; p <= n; ++p) {
    if (deg[p] == 0) fail("isolated vertex " + std::to_string(p));
    run += deg[p];
    I[p] = run;
  }
  // Fill each list from its start.
  std::vector<word> next(n + 1);
  next[1] = 0;
  for (vertex p = 2; p <= n; ++p) next[p] = I[p - 1];
  for (const auto& e : edges) {
    for (const auto& [a, b] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
      const word slot = next[a]++;
      I[n + 1 + 2 * slot] = b;
      I[n + 2 + 2 * slot] = e.w;
    }
  }
  return CsrGraph(std::move(I));
}

std::vector<Edge> CsrGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(m());
  word start = 0;
  for (vertex p = 1; p <= n(); ++p) {
    for (word e = start; e < words_[p]; ++e)
      if (p < neighbor(e)) out.push_back({p, neighbor(e), edge_weight(e)});
    start = words_[p];
  }
  return out;
}

void save_graph(const std::string& path, const CsrGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open " + path);
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  const auto w = g.words();
  out.write(reinterpret_cast<const char*>(w.data()), std::streamsize(w.size_bytes()));
  if (!out) fail("write failed: " + path);
}

CsrGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  char magic[4];
  word version = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) fail("bad magic in " + path);
  if (version != kVersion) fail("unsupported version " + std::to_string(version));
  std::vector<word> words;
  word x;
  while (in.read(reinterpret_cast<char*>(&x), sizeof x)) words.push_back(x);
  if (in.gcount() != 0) fail("truncated word in " + path);
  return CsrGraph(std::move(words));
}

CsrGraph parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  vertex n = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Edge e;
    if (!(ls >> e.u)) continue;
    if (!(ls >> e.v >> e.w)) fail("line " + std::to_string(lineno) + ": expected u v w");
    std::string rest;
    if (ls >> rest) fail("line " + std::to_string(lineno) + ": trailing text");
    n = std::max({n, e.u, e.v});
    edges.push_back(e);
  }
  std::set<std::pair<vertex, vertex>> seen;
  for (const auto& e : edges)
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) fail("parallel edge");
  return CsrGraph::from_edges(n, edges);
}

std::vector<Edge> random_graph(const GenParams& p) {
  require(p.components >= 1, "need at least one component");
  require(p.n >= 2 * p.components, "every component needs two vertices");
  require(p.max_weight >= 1, "max weight must be positive");
  rng::SplitMix g(rng::hash(p.seed, rng::Stream::generator, p.n, p.m));
  std::vector<vertex> order(p.n);
  std::iota(order.begin(), order.end(), vertex{1});
  std::shuffle(order.begin(), order.end(), g);
  std::vector<std::size_t> size(p.components, 2);
  for (std::size_t i = 2 * p.components; i < p.n; ++i) ++size[g.below(p.components)];
  std::size_t capacity = 0;
  for (auto s : size) capacity += s * (s - 1) / 2;
  require(p.m >= p.n - p.components && p.m <= capacity, "edge count not achievable");

  std::vector<std::size_t> base(p.components + 1, 0);
  std::partial_sum(size.begin(), size.end(), base.begin() + 1);
  std::vector<std::size_t> comp_of(p.n);
  for (std::size_t c = 0; c < p.components; ++c)
    for (std::size_t i = base[c]; i < base[c + 1]; ++i) comp_of[i] = c;

  std::set<std::pair<vertex, vertex>> seen;
  std::vector<Edge> edges;
  auto add = [&](vertex a, vertex b) {
    if (!seen.emplace(std::min(a, b), std::max(a, b)).second) return false;
    edges.push_back({a, b, 1 + g.below(p.max_weight)});
    return true;
  };
  for (std::size_t c = 0; c < p.components; ++c)
    for (std::size_t i = base[c] + 1; i < base[c + 1]; ++i)
      add(order[i], order[base[c] + g.below(i - base[c])]);
  while (edges.size() < p.m) {
    const std::size_t i = g.below(p.n);
    const std::size_t c = comp_of[i];
    const std::size_t j = base[c] + g.below(size[c]);
    if (i != j) add(order[i], order[j]);
  }
  return edges;
}

namespace {
struct Entry {
  weight w;
  vertex v;
  bool operator<(const Entry& o) const { return w != o.w ? w < o.w : v < o.v; }
};
}  // namespace

void sort_adjacency(CsrGraph& g) {
  const vertex n = g.n();
  par::for_each(1, n + 1, 64, [&](std::size_t p) {
    const word lo = p == 1 ? 0 : g.offsets()[p - 2];
    const word hi = g.offsets()[p - 1];
    const std::size_t d = hi - lo;
    scratch::Lease<Entry> tmp(d);
    for (std::size_t k = 0; k < d; ++k)
      tmp[k] = {g.edge_weight(lo + k), g.neighbor(lo + k)};
    std::sort(tmp.data(), tmp.data() + d);
    for (std::size_t k = 0; k < d; ++k) {
      g.entry(lo + k)[0] = tmp[k].v;
      g.entry(lo + k)[1] = tmp[k].w;
    }
  });
}

}  // namespace pip::graph
