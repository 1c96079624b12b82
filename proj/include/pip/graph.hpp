#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pip/core.hpp"
#include "pip/encoding.hpp"
#include "pip/graph_types.hpp"

namespace pip::graph {

// Flat CSR array I: I[0] = n, I[p] for p in 1..n is the end of p's entry
// range (entries counted from 0, so p owns [I[p-1], I[p]) with I[0] read as
// 0 here), entry e lives at I[n+1+2e] (neighbor) and I[n+2+2e] (weight).
class CsrGraph {
 public:
  CsrGraph() = default;
  // Validates the layout; throws InputError on malformed input.
  explicit CsrGraph(std::vector<word> words);
  // Throws InputError on self loops, parallel edges, out-of-range endpoints
  // or isolated vertices.
  static CsrGraph from_edges(vertex n, const std::vector<Edge>& edges);

  vertex n() const { return words_.empty() ? 0 : words_[0]; }
  std::size_t m() const { return words_.empty() ? 0 : (words_.size() - 1 - n()) / 4; }
  std::span<word> words() { return words_; }
  std::span<const word> words() const { return words_; }
  // A[0] is vertex 1.
  word* offsets() { return words_.data() + 1; }
  const word* offsets() const { return words_.data() + 1; }
  vertex neighbor(std::size_t e) const { return words_[n() + 1 + 2 * e]; }
  weight edge_weight(std::size_t e) const { return words_[n() + 2 + 2 * e]; }
  word* entry(std::size_t e) { return words_.data() + n() + 1 + 2 * e; }

  // Undirected edges with u < v, reading plain offsets (before any codec
  // is initialised, or after Codec::restore).
  std::vector<Edge> edges() const;

 private:
  std::vector<word> words_;
};

void validate_csr(std::span<const word> words);

// Binary file: "PIPG", a version word, then I verbatim (little-endian).
void save_graph(const std::string& path, const CsrGraph& g);
CsrGraph load_graph(const std::string& path);
// Whitespace separated "u v w" lines; '#' starts a comment. n is the largest
// label seen.
CsrGraph parse_edge_list(std::istream& in);

struct GenParams {
  vertex n = 0;
  std::size_t m = 0;
  weight max_weight = 16;  // weights uniform in [1, max_weight]
  std::size_t components = 1;
  std::uint64_t seed = 1;
};

// Random simple graph with the given component count (vertices assigned to
// components at random, each at least two vertices) and no isolated
// vertices. Throws ContractViolation when m cannot be met.
std::vector<Edge> random_graph(const GenParams& p);

// Entries of every vertex sorted by (weight, neighbor); offsets untouched.
void sort_adjacency(CsrGraph& g);

struct StoredEdge {
  bool present = false;
  Edge edge;
  vertex far_center = 0;  // center on the opposite side of the cut
};

// Per-block state kept in the offset array: four raw cells (lock word whose
// upper bits hold the far center, source, target, weight) followed by
// encoded fields S (center offset in block), P (parent block), root flag,
// coin flag and backups of the raw cells' offsets. Graphs with fewer
// vertices than one block keep their single block in an owned array.
class Codec {
 public:
  explicit Codec(CsrGraph& g);

  const CsrGraph& graph() const { return *g_; }
  CsrGraph& graph() { return *g_; }
  std::size_t block_size() const { return b_; }
  std::size_t blocks() const { return nblocks_; }
  bool owns_block() const { return !aux_.empty(); }
  bool initialized() const { return init_; }
  const enc::BlockLayout& layout() const { return layout_; }

  std::size_t block_of(vertex p) const;
  vertex first_vertex(std::size_t blk) const { return blk * b_ + 1; }
  std::size_t block_len(std::size_t blk) const;

  // Original A[p] (0 for p = 0) at every stage.
  word offset(vertex p) const;
  std::size_t degree(vertex p) const { return offset(p) - offset(p - 1); }

  vertex center(std::size_t blk) const;
  bool is_center(vertex p) const { return center(block_of(p)) == p; }
  std::size_t parent(std::size_t blk) const;
  bool is_root(std::size_t blk) const;
  bool coin(std::size_t blk) const;
  StoredEdge stored(std::size_t blk) const;

  // Backs up raw cells, writes centers (drawn per block, or taken from
  // `centers` indexed by block), makes every block a root with no edge.
  void init(std::uint64_t seed, const std::vector<vertex>* centers = nullptr);
  // Writes backups into the raw cells and resets all pairs: A is the
  // original offset array again.
  void restore();

  void set_parent(std::size_t blk, std::size_t parent);
  void set_root(std::size_t blk, bool root);
  void set_coin(std::size_t blk, bool coin);
  void clear_slot(std::size_t blk);
  // Locked min-update by EdgeKey; true if the slot changed.
  bool offer(std::size_t blk, const Edge& e, vertex far_center);

 private:
  word* block_ptr(std::size_t blk);
  const word* block_ptr(std::size_t blk) const;

  CsrGraph* g_;
  std::size_t b_ = 0;
  std::size_t nblocks_ = 0;
  enc::BlockLayout layout_;
  enc::FieldRef S_, P_, root_, coin_;
  enc::FieldRef backup_[4];
  std::vector<word> aux_;
  bool init_ = false;
};

// Smallest even block size whose layout fits the fields for this graph.
std::size_t codec_block_size(vertex n, std::size_t m);

struct CenterSearchResult {
  std::optional<vertex> center;
  std::size_t visited = 0;
  std::vector<Edge> tree_edges;  // (parent, child, weight) in pop order
  vertex min_label = 0;
  std::optional<EdgeKey> threshold;  // empty while nothing was evicted
  bool exhausted = false;
};

// Frontier bound for iteration k: 2^k * c' * ceil(log2 n)^2.
std::size_t search_limit(vertex n, unsigned k, unsigned c_prime);

// Bounded Prim search from u ordered by EdgeKey of the connecting edge.
CenterSearchResult center_search(const Codec& c, vertex u, unsigned k,
                                 unsigned c_prime = 4);

struct CenterLookup {
  CenterSearchResult result;
  unsigned iterations = 0;  // searches run, 1 when the first one decides
};

// Repeats center_search with k = 0, 1, ... until a center is found or the
// component is exhausted.
CenterLookup find_center(const Codec& c, vertex u, unsigned c_prime = 4);

// Follows parent links to a root-flagged block. Throws InvariantError on a
// cycle.
std::size_t find_root(const Codec& c, std::size_t blk);

struct BuildOptions {
  std::uint64_t seed = 1;
  unsigned c_prime = 4;
  // Center per block, for fixtures; empty draws them from the seed.
  std::vector<vertex> centers;
  // Called after init, after each Boruvka round and each contraction round.
  std::function<void(const Codec&, const char* stage)> observer;
};

struct BuildStats {
  std::size_t boruvka_rounds = 0;
  std::size_t contraction_rounds = 0;
  std::size_t searches = 0;
  std::size_t extra_iterations = 0;  // searches that needed k > 0
};

// One Boruvka round; returns true if any root slot changed.
bool boruvka_round(Codec& c, unsigned c_prime, BuildStats* stats = nullptr);
// One contraction round; returns true if some root still pointed at another
// root when the round started.
bool forest_contraction_round(Codec& c, std::uint64_t seed, std::size_t round);

BuildStats build_oracle(Codec& c, const BuildOptions& opts = {});

// (u, v) must be an edge; throws ContractViolation otherwise.
bool msf_query(const Codec& c, vertex u, vertex v, unsigned c_prime = 4);
vertex connectivity_query(const Codec& c, vertex v, unsigned c_prime = 4);

}  // namespace pip::graph
