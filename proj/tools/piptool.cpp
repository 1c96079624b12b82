#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pip/acceptance.hpp"
#include "pip/alloc_stats.hpp"
#include "pip/graph.hpp"
#include "pip/merge.hpp"
#include "pip/parallel.hpp"
#include "pip/reference.hpp"
#include "pip/shuffle.hpp"
#include "pip/workload.hpp"

namespace {

using namespace pip;

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

std::uint64_t default_seed() {
  if (const char* s = std::getenv("PIP_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 0);
    if (end != s && *end == '\0') return v;
    throw InputError("PIP_SEED is not an integer: " + std::string(s));
  }
  return 1;
}

struct Record {
  std::string algo;
  std::size_t size = 0;
  std::size_t block = 0;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  std::uint64_t us = 0;
  std::size_t heap_peak = 0;
  std::size_t scratch_peak = 0;
  std::string verified = "skip";
};

void csv_header() {
  std::printf("algo,size,block,threads,seed,us,heap_peak,scratch_peak,verified\n");
}

void csv_row(const Record& r) {
  std::printf("%s,%zu,%zu,%zu,%llu,%llu,%zu,%zu,%s\n", r.algo.c_str(), r.size, r.block,
              r.threads, static_cast<unsigned long long>(r.seed),
              static_cast<unsigned long long>(r.us), r.heap_peak, r.scratch_peak,
              r.verified.c_str());
  std::fflush(stdout);
}

// Runs f under a thread cap and fills the timing and allocation columns.
template <class F>
void measure(Record& r, F&& f) {
  par::ThreadLimit limit(r.threads);
  alloc::Window w;
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  r.us = std::max<std::uint64_t>(
      1, std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count());
  r.heap_peak = w.heap_peak_delta();
  r.scratch_peak = w.scratch_peak_delta();
}

std::size_t thread_count(std::size_t requested) {
  return requested == 0 ? par::hardware_threads() : requested;
}

// ---- arrays ---------------------------------------------------------------

Record run_merge(std::vector<word>& data, std::size_t left, std::size_t block,
                 std::size_t threads, std::uint64_t seed, bool verify) {
  Record r;
  r.algo = "merge";
  r.size = data.size();
  r.threads = thread_count(threads);
  r.seed = seed;
  std::vector<word> a, b;
  if (verify) {
    a.assign(data.begin(), data.begin() + left);
    b.assign(data.begin() + left, data.end());
  }
  merge::Options opts;
  opts.block_size = block;
  opts.seed = seed;
  merge::Stats st;
  measure(r, [&] { st = merge::merge(data, left, opts); });
  r.block = st.block_size;
  if (verify) r.verified = data == ref::ref_merge(a, b) ? "pass" : "fail";
  return r;
}

Record run_shuffle(std::vector<word>& data, const std::string& variant, std::size_t chunk,
                   std::size_t threads, std::uint64_t seed, bool verify) {
  Record r;
  r.algo = "shuffle-" + variant;
  r.size = data.size();
  r.threads = thread_count(threads);
  r.seed = seed;
  std::vector<word> before;
  if (verify) before = data;
  measure(r, [&] {
    if (variant == "buffered") {
      shuffle::BufferedParams p;
      p.chunk = chunk;
      r.block = shuffle::buffered_shuffle(data, seed, p).chunk;
    } else if (variant == "parallel") {
      r.block = data.size();
      shuffle::parallel_knuth_shuffle(data, 0, data.size(), seed);
    } else {
      r.block = chunk == 0 ? std::max<std::size_t>(1, data.size() / 64) : chunk;
      shuffle::chunked_shuffle(data, r.block, seed);
    }
  });
  if (verify) {
    bool ok;
    if (variant == "buffered") {
      // Buffered output is a different (equally uniform) permutation; check
      // the multiset.
      auto x = before, y = data;
      std::sort(x.begin(), x.end());
      std::sort(y.begin(), y.end());
      ok = x == y;
    } else {
      std::vector<std::uint64_t> h(before.size());
      for (std::size_t i = 0; i < h.size(); ++i) h[i] = shuffle::target(seed, i);
      if (!before.empty()) ref::ref_knuth_apply(before, h, 0, before.size() - 1);
      ok = before == data;
    }
    r.verified = ok ? "pass" : "fail";
  }
  return r;
}

// ---- graphs ---------------------------------------------------------------

graph::CsrGraph read_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, "PIPG", 4) == 0) return graph::load_graph(path);
  in.clear();
  in.seekg(0);
  return graph::parse_edge_list(in);
}

struct GraphArgs {
  std::string input;
  std::string meta;
  std::uint64_t seed = 0;
  unsigned c_prime = 4;
};

// Picks seed and c' from the metadata file written by `graph build` when
// one is given.
void apply_meta(GraphArgs& g) {
  if (g.meta.empty()) return;
  std::ifstream in(g.meta);
  if (!in) throw InputError("cannot open " + g.meta);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("seed") || !j.contains("c_prime"))
    throw InputError("malformed codec metadata " + g.meta);
  g.seed = j["seed"].get<std::uint64_t>();
  g.c_prime = j["c_prime"].get<unsigned>();
}

graph::BuildStats build(graph::Codec& c, const GraphArgs& a) {
  graph::BuildOptions o;
  o.seed = a.seed;
  o.c_prime = a.c_prime;
  return graph::build_oracle(c, o);
}

nlohmann::json codec_meta(const graph::Codec& c, const GraphArgs& a, const graph::BuildStats& st) {
  nlohmann::json j;
  j["n"] = c.graph().n();
  j["m"] = c.graph().m();
  j["seed"] = a.seed;
  j["c_prime"] = a.c_prime;
  j["block_size"] = c.block_size();
  j["blocks"] = c.blocks();
  j["owns_block"] = c.owns_block();
  j["boruvka_rounds"] = st.boruvka_rounds;
  j["contraction_rounds"] = st.contraction_rounds;
  j["searches"] = st.searches;
  j["extra_iterations"] = st.extra_iterations;
  std::vector<graph::vertex> centers, roots;
  for (std::size_t b = 0; b < c.blocks(); ++b) {
    centers.push_back(c.center(b));
    if (c.is_root(b)) roots.push_back(c.center(b));
  }
  j["centers"] = centers;
  j["root_centers"] = roots;
  return j;
}

int verify_graph(const graph::CsrGraph& original, const GraphArgs& a, bool report) {
  const auto edges = original.edges();
  auto g = original;
  graph::Codec c(g);
  build(c, a);
  const auto msf = ref::ref_kruskal(g.n(), edges);
  std::size_t bad_msf = 0, bad_conn = 0;
  for (const auto& e : edges)
    bad_msf += graph::msf_query(c, e.u, e.v, a.c_prime) != (msf.count(graph::EdgeKey(e)) > 0);
  const auto labels = ref::ref_components(g.n(), edges);
  std::map<std::uint64_t, graph::vertex> fwd;
  std::map<graph::vertex, std::uint64_t> back;
  for (graph::vertex v = 1; v <= g.n(); ++v) {
    const auto got = graph::connectivity_query(c, v, a.c_prime);
    bad_conn += fwd.emplace(labels[v], got).first->second != got;
    bad_conn += back.emplace(got, labels[v]).first->second != labels[v];
  }
  if (report) {
    std::printf("msf: %zu/%zu edges agree with Kruskal\n", edges.size() - bad_msf, edges.size());
    std::printf("connectivity: %zu mismatches against BFS components\n", bad_conn);
  }
  return bad_msf == 0 && bad_conn == 0 ? kOk : kVerifyFailed;
}

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InputError("not a list of non-negative numbers: " + s);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::size_t parse_size(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 1) throw InputError("not a size: " + s);
  return v[0];
}

int run(int argc, char** argv) {
  CLI::App app("Parallel in-place merge, shuffle and graph oracle tool.");
  app.require_subcommand(1);
  const std::uint64_t seed0 = default_seed();

  // gen-array
  auto* ga = app.add_subcommand("gen-array", "Write a random array file");
  std::string ga_size;
  std::uint64_t ga_seed = seed0;
  std::string ga_kind = "random-distinct", ga_out;
  ga->add_option("--size", ga_size, "number of keys (1e6 style allowed)")->required();
  ga->add_option("--seed", ga_seed, "seed (default PIP_SEED or 1)");
  ga->add_option("--kind", ga_kind, "random-distinct or sorted-pair")
      ->check(CLI::IsMember({"random-distinct", "sorted-pair"}));
  ga->add_option("--out", ga_out, "output file")->required();

  // gen-graph
  auto* gg = app.add_subcommand("gen-graph", "Write a random graph file");
  graph::vertex gg_n = 0;
  std::size_t gg_m = 0;
  graph::weight gg_w = 16;
  std::uint64_t gg_seed = seed0;
  std::string gg_kind = "gnm", gg_out;
  gg->add_option("--n", gg_n, "vertices")->required();
  gg->add_option("--m", gg_m, "edges (gnm, dumbbell)");
  gg->add_option("--max-weight", gg_w, "weights uniform in [1, max]");
  gg->add_option("--seed", gg_seed, "seed (default PIP_SEED or 1)");
  gg->add_option("--kind", gg_kind, "gnm, grid, path or dumbbell")
      ->check(CLI::IsMember({"gnm", "grid", "path", "dumbbell"}));
  gg->add_option("--out", gg_out, "output file")->required();

  // merge
  auto* mg = app.add_subcommand("merge", "Merge the two runs of an array file");
  std::string mg_in, mg_out;
  std::size_t mg_block = 0, mg_threads = 0;
  std::uint64_t mg_seed = seed0;
  bool mg_verify = false;
  mg->add_option("--input", mg_in, "sorted-pair array file")->required();
  mg->add_option("--out", mg_out, "write the merged array here");
  mg->add_option("--block", mg_block, "block size (0: default)");
  mg->add_option("--threads", mg_threads, "worker threads (0: all)");
  mg->add_option("--seed", mg_seed, "coin seed");
  mg->add_flag("--verify", mg_verify, "compare with the reference merge");

  // shuffle
  auto* sh = app.add_subcommand("shuffle", "Shuffle an array file");
  std::string sh_in, sh_out, sh_variant = "buffered";
  std::size_t sh_chunk = 0, sh_threads = 0;
  std::uint64_t sh_seed = seed0;
  bool sh_verify = false;
  sh->add_option("--input", sh_in, "array file")->required();
  sh->add_option("--out", sh_out, "write the shuffled array here");
  sh->add_option("--variant", sh_variant, "buffered, parallel or chunked")
      ->check(CLI::IsMember({"buffered", "parallel", "chunked"}));
  sh->add_option("--chunk", sh_chunk, "swaps per round (0: default)");
  sh->add_option("--threads", sh_threads, "worker threads (0: all)");
  sh->add_option("--seed", sh_seed, "seed");
  sh->add_flag("--verify", sh_verify, "check against the sequential replay");

  // graph
  auto* gr = app.add_subcommand("graph", "Graph oracle commands");
  gr->require_subcommand(1);
  GraphArgs gargs;
  gargs.seed = seed0;
  auto graph_opts = [&](CLI::App* s, bool meta) {
    s->add_option("--input", gargs.input, "PIPG file or text edge list")->required();
    s->add_option("--seed", gargs.seed, "center and coin seed");
    s->add_option("--c-prime", gargs.c_prime, "search capacity constant");
    if (meta) s->add_option("--meta", gargs.meta, "codec metadata from graph build");
  };
  auto* gb = gr->add_subcommand("build", "Build the oracle and report its shape");
  graph_opts(gb, false);
  std::string meta_out;
  gb->add_option("--out-codec-meta", meta_out, "write codec metadata JSON");
  auto* gm = gr->add_subcommand("query-msf", "Is edge (u, v) in the minimum spanning forest");
  graph_opts(gm, true);
  graph::vertex qu = 0, qv = 0;
  gm->add_option("u", qu)->required();
  gm->add_option("v", qv)->required();
  auto* gc = gr->add_subcommand("query-conn", "Component representative of v");
  graph_opts(gc, true);
  graph::vertex cv = 0;
  gc->add_option("v", cv)->required();
  auto* gv = gr->add_subcommand("verify", "Check every query against the references");
  graph_opts(gv, true);
  bool against = false;
  gv->add_flag("--against-kruskal", against, "compare with Kruskal and BFS")->required();

  // bench
  auto* bn = app.add_subcommand("bench", "Emit CSV benchmark records");
  std::string bn_algo, bn_sizes, bn_threads = "0", bn_seeds;
  bool bn_verify = false;
  bn->add_option("--algo", bn_algo, "merge, shuffle or graph")
      ->check(CLI::IsMember({"merge", "shuffle", "graph"}));
  bn->add_option("--sizes", bn_sizes, "comma separated sizes (1e6 style allowed)");
  bn->add_option("--threads", bn_threads, "comma separated thread counts (0: all)");
  bn->add_option("--seeds", bn_seeds, "comma separated seeds (default PIP_SEED or 1)");
  bn->add_flag("--verify", bn_verify, "cross-check each run against the references");

  // verify-all
  auto* va = app.add_subcommand("verify-all", "Run the acceptance suite");
  std::string va_scale = "smoke", va_fault = "none";
  std::uint64_t va_seed = seed0;
  va->add_option("--scale", va_scale, "smoke or full")->check(CLI::IsMember({"smoke", "full"}));
  va->add_option("--inject-fault", va_fault, "none or codec")
      ->check(CLI::IsMember({"none", "codec"}));
  va->add_option("--seed", va_seed, "base seed");
  std::vector<int> va_only;
  va->add_option("--only", va_only, "criterion ids to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*ga) {
    workload::save_array(ga_out, workload::make_array(*workload::parse_array_kind(ga_kind), parse_size(ga_size), ga_seed));
    return kOk;
  }
  if (*gg) {
    const auto kind = *workload::parse_graph_kind(gg_kind);
    if (kind == workload::GraphKind::gnm && gg_m == 0) gg_m = 2 * gg_n;
    const auto g = graph::CsrGraph::from_edges(gg_n, workload::make_graph(kind, gg_n, gg_m, gg_seed, gg_w));
    graph::save_graph(gg_out, g);
    return kOk;
  }
  if (*mg) {
    auto f = workload::load_array(mg_in);
    csv_header();
    const auto r = run_merge(f.data, f.left, mg_block, mg_threads, mg_seed, mg_verify);
    csv_row(r);
    if (!mg_out.empty()) workload::save_array(mg_out, {f.data.size(), f.data});
    return r.verified == "fail" ? kVerifyFailed : kOk;
  }
  if (*sh) {
    auto f = workload::load_array(sh_in);
    csv_header();
    const auto r = run_shuffle(f.data, sh_variant, sh_chunk, sh_threads, sh_seed, sh_verify);
    csv_row(r);
    if (!sh_out.empty()) workload::save_array(sh_out, {f.data.size(), f.data});
    return r.verified == "fail" ? kVerifyFailed : kOk;
  }
  if (*gr) {
    apply_meta(gargs);
    auto g = read_graph(gargs.input);
    if (*gv) return verify_graph(g, gargs, true);
    graph::Codec c(g);
    const auto st = build(c, gargs);
    if (*gb) {
      const auto j = codec_meta(c, gargs, st);
      if (!meta_out.empty()) {
        std::ofstream out(meta_out);
        if (!out) throw InputError("cannot open " + meta_out);
        out << j.dump(2) << "\n";
      }
      std::printf("n=%llu m=%zu blocks=%zu block_size=%zu boruvka_rounds=%zu contraction_rounds=%zu\n",
                  static_cast<unsigned long long>(g.n()), g.m(), c.blocks(), c.block_size(),
                  st.boruvka_rounds, st.contraction_rounds);
      return kOk;
    }
    if (*gm) {
      std::printf("%s\n", graph::msf_query(c, qu, qv, gargs.c_prime) ? "true" : "false");
      return kOk;
    }
    std::printf("%llu\n", static_cast<unsigned long long>(graph::connectivity_query(c, cv, gargs.c_prime)));
    return kOk;
  }
  if (*bn) {
    if (bn_algo.empty() || bn_sizes.empty()) {
      std::fprintf(stderr, "bench: --algo and --sizes are required\n");
      return kUsage;
    }
    const auto sizes = parse_list(bn_sizes);
    const auto threads = parse_list(bn_threads);
    std::vector<std::uint64_t> seeds;
    for (auto s : parse_list(bn_seeds.empty() ? std::to_string(seed0) : bn_seeds)) seeds.push_back(s);
    if (sizes.empty() || threads.empty() || seeds.empty()) {
      std::fprintf(stderr, "bench: empty run specification\n");
      return kUsage;
    }
    bool failed = false;
    csv_header();
    for (auto size : sizes)
      for (auto seed : seeds) {
        workload::ArrayFile base;
        if (bn_algo != "graph")
          base = workload::make_array(bn_algo == "merge" ? workload::ArrayKind::sorted_pair
                                                         : workload::ArrayKind::random_distinct,
                                      size, seed);
        for (auto t : threads) {
          Record r;
          if (bn_algo == "graph") {
            const auto n = static_cast<graph::vertex>(std::max<std::size_t>(size, 4));
            auto g = graph::CsrGraph::from_edges(
                n, workload::make_graph(workload::GraphKind::gnm, n, 2 * n, seed));
            const auto original = g;
            graph::Codec c(g);
            r.algo = "graph-build";
            r.size = n;
            r.threads = thread_count(t);
            r.seed = seed;
            GraphArgs a;
            a.seed = seed;
            measure(r, [&] { build(c, a); });
            r.block = c.block_size();
            if (bn_verify) r.verified = verify_graph(original, a, false) == kOk ? "pass" : "fail";
          } else {
            auto data = base.data;
            r = bn_algo == "merge" ? run_merge(data, base.left, 0, t, seed, bn_verify)
                                   : run_shuffle(data, "buffered", 0, t, seed, bn_verify);
          }
          failed = failed || r.verified == "fail";
          csv_row(r);
        }
      }
    return failed ? kVerifyFailed : kOk;
  }
  if (*va) {
    acceptance::Config cfg;
    cfg.scale = *acceptance::parse_scale(va_scale);
    cfg.fault = *acceptance::parse_fault(va_fault);
    cfg.seed = va_seed;
    cfg.only = va_only;
    const auto results = acceptance::run(cfg, [](const acceptance::Result& r) {
      std::printf("%s\n", acceptance::format(r).c_str());
      std::fflush(stdout);
    });
    return acceptance::all_passed(results) ? kOk : kVerifyFailed;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const pip::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const pip::ContractViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kVerifyFailed;
  }
}
