#include "pip/workload.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pip/graph.hpp"

namespace pip::workload {

namespace {

constexpr char kMagic[4] = {'P', 'I', 'P', 'A'};
constexpr word kVersion = 1;

void fail(const std::string& what) { throw InputError("array: " + what); }

}  // namespace

std::vector<word> distinct_sorted(rng::SplitMix& g, std::size_t n, word lo,
                                  word hi) {
  require(lo < hi, "empty key range");
  std::vector<word> v(n);
  const word step = (hi - lo) / (n + 1);
  require(step >= 1, "key range too small");
  word x = lo;
  for (auto& e : v) e = (x += 1 + g.below(std::max<word>(1, 2 * step - 1)));
  return v;
}

void sorted_pair(rng::SplitMix& g, std::size_t na, std::size_t nb,
                 std::vector<word>& a, std::vector<word>& b) {
  const auto all = distinct_sorted(g, na + nb);
  a.clear();
  b.clear();
  a.reserve(na);
  b.reserve(nb);
  std::size_t ra = na, rb = nb;
  for (word x : all) {
    if (g.below(ra + rb) < ra) {
      a.push_back(x);
      --ra;
    } else {
      b.push_back(x);
      --rb;
    }
  }
}

std::vector<word> random_distinct(rng::SplitMix& g, std::size_t n) {
  auto v = distinct_sorted(g, n);
  std::shuffle(v.begin(), v.end(), g);
  return v;
}

std::optional<ArrayKind> parse_array_kind(std::string_view s) {
  if (s == "random-distinct") return ArrayKind::random_distinct;
  if (s == "sorted-pair") return ArrayKind::sorted_pair;
  return std::nullopt;
}

ArrayFile make_array(ArrayKind kind, std::size_t n, std::uint64_t seed) {
  rng::SplitMix g(rng::hash(seed, rng::Stream::generator, n, 1));
  ArrayFile f;
  if (kind == ArrayKind::random_distinct) {
    f.data = random_distinct(g, n);
    f.left = n;
    return f;
  }
  std::vector<word> b;
  sorted_pair(g, n / 2, n - n / 2, f.data, b);
  f.left = f.data.size();
  f.data.insert(f.data.end(), b.begin(), b.end());
  return f;
}

void save_array(const std::string& path, const ArrayFile& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open " + path);
  const word head[3] = {kVersion, f.left, f.data.size()};
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(head), sizeof head);
  out.write(reinterpret_cast<const char*>(f.data.data()),
            std::streamsize(f.data.size() * sizeof(word)));
  if (!out) fail("write failed: " + path);
}

ArrayFile load_array(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  char magic[4];
  word head[3];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(head), sizeof head);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) fail("bad magic in " + path);
  if (head[0] != kVersion) fail("unsupported version " + std::to_string(head[0]));
  if (head[1] > head[2]) fail("split point past the end");
  ArrayFile f;
  f.left = head[1];
  f.data.resize(head[2]);
  in.read(reinterpret_cast<char*>(f.data.data()),
          std::streamsize(f.data.size() * sizeof(word)));
  if (std::size_t(in.gcount()) != f.data.size() * sizeof(word)) fail("truncated " + path);
  if (in.peek() != std::char_traits<char>::eof()) fail("trailing bytes in " + path);
  return f;
}

std::optional<GraphKind> parse_graph_kind(std::string_view s) {
  if (s == "gnm") return GraphKind::gnm;
  if (s == "grid") return GraphKind::grid;
  if (s == "path") return GraphKind::path;
  if (s == "dumbbell") return GraphKind::dumbbell;
  return std::nullopt;
}

std::vector<graph::Edge> make_graph(GraphKind kind, graph::vertex n,
                                    std::size_t m, std::uint64_t seed,
                                    graph::weight max_weight) {
  using graph::Edge;
  require(n >= 2, "graphs need at least two vertices");
  rng::SplitMix g(rng::hash(seed, rng::Stream::generator, n, m + 7));
  auto w = [&] { return 1 + g.below(max_weight); };
  std::vector<Edge> e;
  switch (kind) {
    case GraphKind::gnm: {
      graph::GenParams p;
      p.n = n;
      p.m = m;
      p.seed = seed;
      p.max_weight = max_weight;
      return graph::random_graph(p);
    }
    case GraphKind::path:
      for (graph::vertex v = 1; v < n; ++v) e.push_back({v, v + 1, w()});
      return e;
    case GraphKind::grid: {
      const graph::vertex cols = std::max<graph::vertex>(2, graph::vertex(std::sqrt(double(n))));
      for (graph::vertex v = 1; v <= n; ++v) {
        const graph::vertex col = (v - 1) % cols;
        if (col + 1 < cols && v + 1 <= n) e.push_back({v, v + 1, w()});
        if (v + cols <= n) e.push_back({v, v + cols, w()});
      }
      return e;
    }
    case GraphKind::dumbbell: {
      require(n >= 4, "dumbbell needs at least four vertices");
      const graph::vertex h = n / 2;
      const std::size_t half = std::max<std::size_t>(m / 2, n - h - 1);
      for (int side = 0; side < 2; ++side) {
        graph::GenParams p;
        p.n = side == 0 ? h : n - h;
        const std::size_t cap = p.n * (p.n - 1) / 2;
        p.m = std::min(cap, std::max<std::size_t>(half, p.n - 1));
        p.seed = seed + side;
        p.max_weight = max_weight;
        for (auto x : graph::random_graph(p)) {
          if (side == 1) {
            x.u += h;
            x.v += h;
          }
          e.push_back(x);
        }
      }
      e.push_back({h, h + 1, w()});
      return e;
    }
  }
  return e;
}

}  // namespace pip::workload
