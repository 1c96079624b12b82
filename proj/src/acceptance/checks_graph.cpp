#include <map>
#include <set>
#include <vector>

#include "checks.hpp"
#include "pip/graph.hpp"
#include "pip/reference.hpp"

namespace pip::acceptance {

namespace {

using namespace pip::graph;

struct Sample {
  vertex n = 0;
  std::vector<Edge> edges;
};

// Corpus shared by the MSF and connectivity checks: n <= 256, m <= 2048,
// small weight ranges so equal weights are common, every fourth graph split
// into several components.
Sample corpus_graph(const Ctx& c, std::size_t i) {
  rng::SplitMix g(c.seed(9000 + i));
  GenParams p;
  p.components = i % 4 == 3 ? 2 + g.below(3) : 1;
  p.n = std::max<vertex>(2 * p.components, 4 + g.below(253));
  p.max_weight = 1 + g.below(8);
  p.seed = g.next();
  std::size_t extra = std::min<std::size_t>(g.below(3 * p.n), 2048 - (p.n - p.components));
  for (;;) {
    p.m = p.n - p.components + extra;
    try {
      return {p.n, random_graph(p)};
    } catch (const ContractViolation&) {
      extra /= 2;  // components too small for this many edges
    }
  }
}

std::vector<bool> center_flags(const Codec& c) {
  std::vector<bool> f(c.graph().n() + 1, false);
  for (std::size_t b = 0; b < c.blocks(); ++b) f[c.center(b)] = true;
  return f;
}

// Same partition: labels map one-to-one.
bool same_partition(const std::vector<std::uint64_t>& want, const std::vector<vertex>& got,
                    vertex n) {
  std::map<std::uint64_t, vertex> fwd;
  std::map<vertex, std::uint64_t> back;
  for (vertex v = 1; v <= n; ++v) {
    if (fwd.emplace(want[v], got[v]).first->second != got[v]) return false;
    if (back.emplace(got[v], want[v]).first->second != want[v]) return false;
  }
  return true;
}

struct ConnRun {
  bool ok = false;
  std::size_t centerless = 0;  // vertices whose lookup found no center
};

ConnRun connectivity_run(vertex n, const std::vector<Edge>& edges, const BuildOptions& o) {
  auto g = CsrGraph::from_edges(n, edges);
  Codec codec(g);
  build_oracle(codec, o);
  ConnRun r;
  std::vector<vertex> got(n + 1, 0);
  for (vertex v = 1; v <= n; ++v) {
    got[v] = connectivity_query(codec, v);
    r.centerless += !find_center(codec, v).result.center;
  }
  r.ok = same_partition(ref::ref_components(n, edges), got, n);
  return r;
}

}  // namespace

Outcome check_msf(const Ctx& c) {
  Tally graphs;
  std::size_t queries = 0, agree = 0;
  const std::size_t count = c.pick(500, 60);
  for (std::size_t i = 0; i < count; ++i) {
    const auto s = corpus_graph(c, i);
    auto g = CsrGraph::from_edges(s.n, s.edges);
    Codec codec(g);
    BuildOptions o;
    o.seed = c.seed(9500 + i);
    build_oracle(codec, o);
    const auto msf = ref::ref_kruskal(s.n, s.edges);
    std::size_t bad = 0;
    for (const auto& e : s.edges) {
      const bool ok = msf_query(codec, e.u, e.v) == (msf.count(EdgeKey(e)) > 0);
      ++queries;
      agree += ok;
      bad += !ok;
    }
    graphs.check(bad == 0, "graph " + std::to_string(i) + " (n=" + std::to_string(s.n) +
                               ", m=" + std::to_string(s.edges.size()) + "): " +
                               std::to_string(bad) + " wrong");
  }
  return {graphs.ok(), std::to_string(agree) + "/" + std::to_string(queries) +
                           " edge queries agree; " + graphs.summary("graphs exact")};
}

Outcome check_connectivity(const Ctx& c) {
  Tally t;
  std::size_t centerless = 0;
  const std::size_t count = c.pick(500, 60);
  for (std::size_t i = 0; i < count; ++i) {
    const auto s = corpus_graph(c, i);
    BuildOptions o;
    o.seed = c.seed(9500 + i);
    const auto r = connectivity_run(s.n, s.edges, o);
    centerless += r.centerless;
    t.check(r.ok, "corpus graph " + std::to_string(i));
  }
  // Several components spread over many blocks.
  {
    GenParams p;
    p.n = 2000;
    p.m = 4000;
    p.components = 5;
    p.seed = c.seed(10);
    BuildOptions o;
    o.seed = p.seed;
    const auto r = connectivity_run(p.n, random_graph(p), o);
    centerless += r.centerless;
    t.check(r.ok, "multi-component multi-block fixture");
  }
  // A triangle on 5, 6, 7 inside block 0 whose center is vertex 1, next to a
  // long path: the triangle has no center and must report label 5.
  {
    const vertex n = 1500;
    std::vector<Edge> e{{5, 6, 2}, {6, 7, 1}, {5, 7, 3}};
    std::vector<vertex> rest;
    for (vertex v = 1; v <= n; ++v)
      if (v < 5 || v > 7) rest.push_back(v);
    for (std::size_t k = 1; k < rest.size(); ++k) e.push_back({rest[k - 1], rest[k], 1 + k % 3});
    auto g = CsrGraph::from_edges(n, e);
    Codec probe(g);
    BuildOptions o;
    for (std::size_t b = 0; b < probe.blocks(); ++b) o.centers.push_back(probe.first_vertex(b));
    const auto r = connectivity_run(n, e, o);
    centerless += r.centerless;
    t.check(r.ok && r.centerless == 3, "centerless fixture");
    auto g2 = CsrGraph::from_edges(n, e);
    Codec c2(g2);
    build_oracle(c2, o);
    t.check(connectivity_query(c2, 6) == 5, "centerless component label is not its minimum");
  }
  return {t.ok(), t.summary("partitions equal ref_components") + "; " +
                      std::to_string(centerless) + " vertex lookups in centerless components"};
}

Outcome check_center_search(const Ctx& c) {
  Tally t;
  std::size_t lookups = 0, doubled = 0;
  const std::size_t count = c.pick(200, 60);
  for (std::size_t i = 0; i < count; ++i) {
    rng::SplitMix r(c.seed(11000 + i));
    GenParams p;
    p.components = i % 5 == 4 ? 2 : 1;
    p.n = 2 * p.components + r.below(127 - 2 * p.components);
    p.max_weight = 1 + r.below(6);
    p.seed = r.next();
    std::size_t extra = r.below(2 * p.n);
    std::vector<Edge> edges;
    for (;;) {
      p.m = p.n - p.components + extra;
      try {
        edges = random_graph(p);
        break;
      } catch (const ContractViolation&) {
        extra /= 2;
      }
    }
    auto g = CsrGraph::from_edges(p.n, edges);
    Codec codec(g);
    sort_adjacency(g);
    codec.init(r.next());
    const auto flags = center_flags(codec);
    t.check(search_limit(p.n, 0, 4) >= p.n, "L < n");
    std::size_t bad = 0;
    for (vertex u = 1; u <= p.n; ++u) {
      const auto got = center_search(codec, u, 0);
      bad += got.center != ref::ref_prim_first_center(p.n, edges, flags, u);
      ++lookups;
      doubled += find_center(codec, u).iterations > 1;
    }
    t.check(bad == 0, "graph " + std::to_string(i) + ": " + std::to_string(bad) + " starts differ");
  }
  const double rate = 100.0 * double(doubled) / double(lookups);
  char line[96];
  std::snprintf(line, sizeof line, "; doubling in %.3f%% of %zu lookups", rate, lookups);
  return {t.ok() && rate < 1.0, t.summary("graphs match Prim-first center") + line};
}

Outcome check_offset_recovery(const Ctx& c) {
  Tally t;
  std::size_t stages = 0;
  const std::size_t count = c.pick(50, 10);
  for (std::size_t i = 0; i < count; ++i) {
    rng::SplitMix r(c.seed(12000 + i));
    GenParams p;
    p.n = i == 0 ? 600 : 100 + r.below(500);
    p.m = p.n + r.below(2 * p.n);
    p.max_weight = 1 + r.below(8);
    p.seed = r.next();
    auto g = CsrGraph::from_edges(p.n, random_graph(p));
    const std::vector<word> snapshot(g.offsets(), g.offsets() + p.n);
    Codec codec(g);
    std::size_t bad = 0;
    auto compare = [&](const Codec& cc) {
      ++stages;
      for (vertex v = 1; v <= p.n; ++v) bad += cc.offset(v) != snapshot[v - 1];
    };
    BuildOptions o;
    o.seed = r.next();
    o.observer = [&](const Codec& cc, const char*) { compare(cc); };
    build_oracle(codec, o);
    if (i == 0 && c.cfg.fault == Fault::codec) {
      // Flip one bit of block 0's backup of its first offset.
      const auto f = codec.layout().field("backup0");
      f.write(g.offsets(), f.read(g.offsets()) ^ 1);
    }
    compare(codec);
    codec.restore();
    for (vertex v = 1; v <= p.n; ++v) bad += g.offsets()[v - 1] != snapshot[v - 1];
    t.check(bad == 0, "build " + std::to_string(i) + " (n=" + std::to_string(p.n) + "): " +
                          std::to_string(bad) + " offsets differ");
  }
  return {t.ok(), t.summary("builds") + " over " + std::to_string(stages) + " checked stages"};
}

}  // namespace pip::acceptance
