#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pip/graph.hpp"
#include "pip/reference.hpp"

using namespace pip;
using namespace pip::graph;

namespace {

CsrGraph make(vertex n, std::size_t m, std::uint64_t seed, weight maxw = 8,
              std::size_t comps = 1) {
  GenParams p;
  p.n = n;
  p.m = m;
  p.seed = seed;
  p.max_weight = maxw;
  p.components = comps;
  return CsrGraph::from_edges(n, random_graph(p));
}

std::vector<bool> center_flags(const Codec& c) {
  std::vector<bool> f(c.graph().n() + 1, false);
  for (std::size_t b = 0; b < c.blocks(); ++b) f[c.center(b)] = true;
  return f;
}

std::set<EdgeKey> stored_forest(const Codec& c) {
  std::set<EdgeKey> out;
  for (std::size_t b = 0; b < c.blocks(); ++b) {
    const auto s = c.stored(b);
    if (c.is_root(b)) {
      CHECK_FALSE(s.present);
      continue;
    }
    REQUIRE(s.present);
    out.insert(EdgeKey(s.edge));
  }
  return out;
}

std::vector<word> plain_offsets(const CsrGraph& g) {
  return {g.words().begin() + 1, g.words().begin() + 1 + g.n()};
}

// Path 1 - 2 - ... - n with weights 1.
CsrGraph path(vertex n) {
  std::vector<Edge> e;
  for (vertex v = 1; v < n; ++v) e.push_back({v, v + 1, 1});
  return CsrGraph::from_edges(n, e);
}

}  // namespace

TEST_CASE("csr construction and validation") {
  const auto g = CsrGraph::from_edges(3, {{1, 2, 5}, {2, 3, 1}, {1, 3, 2}});
  CHECK(g.n() == 3);
  CHECK(g.m() == 3);
  CHECK(g.edges().size() == 3);
  CHECK_THROWS_AS(CsrGraph::from_edges(3, {{1, 2, 1}}), InputError);
  CHECK_THROWS_AS(CsrGraph::from_edges(2, {{1, 1, 1}, {1, 2, 1}}), InputError);
  CHECK_THROWS_AS(CsrGraph::from_edges(2, {{1, 2, 1}, {2, 1, 3}}), InputError);
  auto w = std::vector<word>(g.words().begin(), g.words().end());
  w[2] = w[1];
  CHECK_THROWS_AS(CsrGraph{w}, InputError);
  auto asym = std::vector<word>(g.words().begin(), g.words().end());
  asym[5] += 1;  // first weight of vertex 1 only
  CHECK_THROWS_AS(CsrGraph{asym}, InputError);
}

TEST_CASE("file and text round trips") {
  const auto g = make(50, 120, 3);
  const auto path_name = (std::filesystem::temp_directory_path() / "pip_graph_test.bin").string();
  save_graph(path_name, g);
  const auto h = load_graph(path_name);
  CHECK(std::equal(g.words().begin(), g.words().end(), h.words().begin(), h.words().end()));
  std::remove(path_name.c_str());
  std::istringstream text("# triangle\n1 2 5\n2 3 1\n\n3 1 2  # tail\n");
  const auto t = parse_edge_list(text);
  CHECK(t.n() == 3);
  CHECK(t.m() == 3);
  std::istringstream bad("1 2\n");
  CHECK_THROWS_AS(parse_edge_list(bad), InputError);
}

TEST_CASE("generator honours components, sizes and simplicity") {
  for (std::uint64_t s = 1; s <= 30; ++s) {
    GenParams p;
    p.n = 40 + s;
    p.components = 1 + s % 4;
    p.m = p.n + 20;
    p.seed = s;
    const auto e = random_graph(p);
    CHECK(e.size() == p.m);
    const auto labels = ref::ref_components(p.n, e);
    std::set<std::uint64_t> distinct(labels.begin() + 1, labels.end());
    CHECK(distinct.size() == p.components);
  }
}

TEST_CASE("sort_adjacency") {
  auto tri = CsrGraph::from_edges(3, {{1, 2, 5}, {2, 3, 1}, {1, 3, 2}});
  sort_adjacency(tri);
  CHECK(tri.neighbor(0) == 3);
  CHECK(tri.edge_weight(0) == 2);
  CHECK(tri.neighbor(1) == 2);
  const auto once = std::vector<word>(tri.words().begin(), tri.words().end());
  sort_adjacency(tri);
  CHECK(std::equal(once.begin(), once.end(), tri.words().begin()));
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto g = make(200, 800, s, 5);
    const auto offs = plain_offsets(g);
    sort_adjacency(g);
    CHECK(plain_offsets(g) == offs);
    validate_csr(g.words());
    word lo = 0;
    for (vertex p = 1; p <= g.n(); ++p) {
      for (word e = lo + 1; e < g.offsets()[p - 1]; ++e)
        CHECK(std::make_pair(g.edge_weight(e - 1), g.neighbor(e - 1)) <
              std::make_pair(g.edge_weight(e), g.neighbor(e)));
      lo = g.offsets()[p - 1];
    }
  }
}

TEST_CASE("codec geometry") {
  for (vertex n : {2u, 10u, 100u, 1000u, 100000u}) {
    const std::size_t b = codec_block_size(n, 3 * n);
    CHECK(b % 2 == 0);
    CHECK(b >= 8);
  }
  auto small = make(20, 30, 1);
  Codec c(small);
  CHECK(c.owns_block());
  CHECK(c.blocks() == 1);
  auto big = make(2000, 5000, 1);
  Codec d(big);
  CHECK_FALSE(d.owns_block());
  CHECK(d.blocks() == 2000 / d.block_size());
  CHECK(d.block_len(d.blocks() - 1) >= d.block_size());
  CHECK(d.block_of(2000) == d.blocks() - 1);
  CHECK(d.layout().used_cells() <= d.block_size());
}

TEST_CASE("offsets stay readable through init, build and restore") {
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto g = make(1000 + 37 * s, 2500, s);
    const auto orig = plain_offsets(g);
    Codec c(g);
    for (vertex p = 1; p <= g.n(); ++p) REQUIRE(c.offset(p) == orig[p - 1]);
    BuildOptions opts;
    opts.seed = s;
    std::size_t checks = 0;
    opts.observer = [&](const Codec& cc, const char*) {
      ++checks;
      for (vertex p = 1; p <= cc.graph().n(); ++p) REQUIRE(cc.offset(p) == orig[p - 1]);
    };
    build_oracle(c, opts);
    CHECK(checks >= 2);
    CHECK(plain_offsets(g) != orig);
    c.restore();
    CHECK(plain_offsets(g) == orig);
  }
}

TEST_CASE("centers") {
  auto g = make(100, 200, 2);
  Codec c(g);
  c.init(5);
  CHECK(c.blocks() == 1);
  CHECK(c.center(0) >= 1);
  CHECK(c.center(0) <= 100);
  auto h = make(100, 200, 2);
  Codec d(h);
  d.init(5);
  CHECK(d.center(0) == c.center(0));

  // Per-block uniformity over many seeds.
  auto probe = make(400, 800, 1);
  const std::size_t b0 = Codec(probe).block_size();
  auto base = make(vertex(4 * b0), 8 * b0, 9);
  const auto words = std::vector<word>(base.words().begin(), base.words().end());
  Codec shape(base);
  REQUIRE(shape.blocks() >= 2);
  std::vector<std::vector<std::size_t>> hist;
  for (std::size_t k = 0; k < shape.blocks(); ++k) hist.emplace_back(shape.block_len(k), 0);
  const int draws = 4000;
  for (int s = 0; s < draws; ++s) {
    CsrGraph gg(words);
    Codec cc(gg);
    cc.init(std::uint64_t(s));
    for (std::size_t k = 0; k < hist.size(); ++k) ++hist[k][cc.center(k) - cc.first_vertex(k)];
  }
  std::size_t outside = 0, cells = 0;
  for (const auto& row : hist) {
    const double len = double(row.size());
    const double mean = draws / len;
    const double sigma = std::sqrt(mean * (1 - 1 / len));
    for (auto x : row) outside += std::abs(double(x) - mean) > 3 * sigma;
    cells += row.size();
  }
  // About 0.27% of cells fall outside 3 sigma by chance.
  CHECK(outside <= cells / 50 + 2);
}

TEST_CASE("center search basics") {
  auto g = path(30);
  Codec c(g);
  sort_adjacency(g);
  std::vector<vertex> centers{30};
  c.init(1, &centers);
  const auto self = center_search(c, 30, 0);
  CHECK(self.center == std::optional<vertex>(30));
  CHECK(self.visited == 1);
  const auto far = center_search(c, 1, 0);
  CHECK(far.center == std::optional<vertex>(30));
  REQUIRE(far.tree_edges.size() == 29);
  for (vertex v = 1; v < 30; ++v) {
    CHECK(far.tree_edges[v - 1].u == v);
    CHECK(far.tree_edges[v - 1].v == v + 1);
  }
}

TEST_CASE("center search matches unbounded Prim when L >= n") {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const vertex n = 20 + vertex(s % 100);
    auto g = make(n, std::min<std::size_t>(n * (n - 1) / 2, 3 * n), s, 4, 1 + s % 3);
    const auto edges = g.edges();
    Codec c(g);
    sort_adjacency(g);
    // Several centers so searches end early.
    std::vector<bool> flag(n + 1, false);
    c.init(s);
    REQUIRE(c.blocks() == 1);
    REQUIRE(search_limit(n, 0, 4) >= n);
    flag[c.center(0)] = true;
    for (vertex u = 1; u <= n; ++u) {
      const auto r = center_search(c, u, 0);
      const auto want = ref::ref_prim_first_center(n, edges, flag, u);
      CHECK(r.center == want);
      if (!want) CHECK(r.exhausted);
    }
  }
}

TEST_CASE("bounded frontier still finds the Prim-first center") {
  // Small c' forces evictions and truncated neighbor lists.
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto g = make(3000, 12000, s, 3);
    const auto edges = g.edges();
    Codec c(g);
    BuildOptions o;
    o.seed = s;
    sort_adjacency(g);
    c.init(s);
    const auto flag = center_flags(c);
    for (vertex u = 1; u <= 3000; u += 97) {
      const auto got = find_center(c, u, 1);
      CHECK(got.result.center == ref::ref_prim_first_center(3000, edges, flag, u));
    }
  }
}

TEST_CASE("find_root follows chains and detects cycles") {
  auto g = make(3000, 6000, 4);
  Codec c(g);
  c.init(1);
  REQUIRE(c.blocks() >= 3);
  CHECK(find_root(c, 0) == 0);
  c.set_parent(0, 1);
  c.set_root(0, false);
  c.set_parent(1, 2);
  c.set_root(1, false);
  CHECK(find_root(c, 0) == 2);
  c.set_parent(2, 0);
  c.set_root(2, false);
  CHECK_THROWS_AS(find_root(c, 0), InvariantError);
}

TEST_CASE("Boruvka round: one cluster updates nothing") {
  auto g = make(40, 80, 1);
  Codec c(g);
  sort_adjacency(g);
  c.init(1);
  CHECK_FALSE(boruvka_round(c, 4));
  CHECK_FALSE(c.stored(0).present);
}

TEST_CASE("Boruvka round: first round stores each cluster's lightest cut edge") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto g = make(1500, 3500, s, 6);
    const auto edges = g.edges();
    Codec c(g);
    sort_adjacency(g);
    c.init(s);
    const auto flag = center_flags(c);
    const auto cluster = ref::ref_clusters(g.n(), edges, flag);
    std::map<vertex, EdgeKey> best;
    for (const auto& e : edges) {
      if (cluster[e.u] == cluster[e.v]) continue;
      for (vertex side : {cluster[e.u], cluster[e.v]}) {
        auto it = best.find(side);
        if (it == best.end() || EdgeKey(e) < it->second) best[side] = EdgeKey(e);
      }
    }
    CHECK(boruvka_round(c, 4) == !best.empty());
    for (std::size_t b = 0; b < c.blocks(); ++b) {
      const auto st = c.stored(b);
      const auto it = best.find(c.center(b));
      REQUIRE(st.present == (it != best.end()));
      if (st.present) {
        CHECK(EdgeKey(st.edge) == it->second);
        const vertex a = cluster[st.edge.u], z = cluster[st.edge.v];
        CHECK(st.far_center == (a == c.center(b) ? z : a));
      }
    }
  }
}

TEST_CASE("contraction links mutual roots into one") {
  auto g = make(3000, 6000, 2);
  Codec c(g);
  sort_adjacency(g);
  c.init(1);
  REQUIRE(c.blocks() >= 2);
  CHECK_FALSE(forest_contraction_round(c, 1, 0));
  const Edge e{c.center(0), c.center(1), 1};
  c.offer(0, e, c.center(1));
  c.offer(1, e, c.center(0));
  std::size_t round = 0;
  while (forest_contraction_round(c, 1, round)) ++round;
  CHECK(round >= 1);
  CHECK(c.is_root(0) != c.is_root(1));
  CHECK(find_root(c, 0) == find_root(c, 1));
}

TEST_CASE("build stores the cluster-graph MSF") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto g = make(1000 + 50 * s, 2500, s, 4, 1 + s % 3);
    const auto edges = g.edges();
    Codec c(g);
    BuildOptions o;
    o.seed = s;
    std::size_t roots_before = c.blocks();
    o.observer = [&](const Codec& cc, const char* stage) {
      if (std::string(stage) != "contraction") return;
      std::size_t roots = 0;
      for (std::size_t b = 0; b < cc.blocks(); ++b) {
        roots += cc.is_root(b);
        find_root(cc, b);
      }
      CHECK(roots <= roots_before);
      roots_before = roots;
    };
    const auto st = build_oracle(c, o);
    CHECK(st.boruvka_rounds >= 1);
    const auto want = ref::ref_cluster_msf(g.n(), edges, center_flags(c));
    CHECK(stored_forest(c) == want);
  }
}

TEST_CASE("msf and connectivity queries match the references") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const vertex n = s < 6 ? 60 + vertex(s) * 30 : 800 + vertex(s) * 50;
    auto g = make(n, 3 * n, s, 5, 1 + s % 3);
    const auto edges = g.edges();
    Codec c(g);
    BuildOptions o;
    o.seed = s;
    build_oracle(c, o);
    const auto msf = ref::ref_kruskal(n, edges);
    for (const auto& e : edges) CHECK(msf_query(c, e.u, e.v) == (msf.count(EdgeKey(e)) > 0));
    const auto labels = ref::ref_components(n, edges);
    std::map<vertex, vertex> ours_to_ref;
    std::map<vertex, vertex> ref_to_ours;
    for (vertex v = 1; v <= n; ++v) {
      const vertex got = connectivity_query(c, v);
      const auto [a, ia] = ours_to_ref.emplace(got, labels[v]);
      const auto [b, ib] = ref_to_ours.emplace(labels[v], got);
      CHECK(a->second == labels[v]);
      CHECK(b->second == got);
    }
  }
}

TEST_CASE("small fixtures") {
  auto tri = CsrGraph::from_edges(3, {{1, 2, 1}, {2, 3, 2}, {1, 3, 3}});
  Codec c(tri);
  build_oracle(c);
  CHECK(msf_query(c, 1, 2));
  CHECK(msf_query(c, 3, 2));
  CHECK_FALSE(msf_query(c, 1, 3));

  auto tree = path(25);
  Codec t(tree);
  build_oracle(t);
  for (vertex v = 1; v < 25; ++v) CHECK(msf_query(t, v, v + 1));
  CHECK_THROWS_AS(msf_query(t, 1, 3), ContractViolation);
}

TEST_CASE("centerless component uses the minimum label") {
  // Large path plus a triangle on 5, 6, 7 whose block center lies elsewhere.
  const vertex n = 3000;
  std::vector<Edge> e{{5, 6, 2}, {6, 7, 1}, {5, 7, 3}};
  std::vector<vertex> rest;
  for (vertex v = 1; v <= n; ++v)
    if (v < 5 || v > 7) rest.push_back(v);
  for (std::size_t i = 1; i < rest.size(); ++i) e.push_back({rest[i - 1], rest[i], 1 + i % 3});
  auto g = CsrGraph::from_edges(n, e);
  Codec c(g);
  std::vector<vertex> centers;
  for (std::size_t b = 0; b < c.blocks(); ++b) centers.push_back(c.first_vertex(b));
  BuildOptions o;
  o.centers = centers;
  build_oracle(c, o);
  CHECK(connectivity_query(c, 5) == 5);
  CHECK(connectivity_query(c, 6) == 5);
  CHECK(connectivity_query(c, 7) == 5);
  CHECK(connectivity_query(c, 100) == connectivity_query(c, n));
  CHECK(connectivity_query(c, 100) != 5);
  CHECK(msf_query(c, 6, 7));
  CHECK(msf_query(c, 5, 6));
  CHECK_FALSE(msf_query(c, 5, 7));
  const auto lk = find_center(c, 6);
  CHECK(lk.result.exhausted);
  CHECK_FALSE(lk.result.center);
  CHECK(lk.result.min_label == 5);
}
