#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "pip/graph_types.hpp"

// Brute-force oracles. Deliberately independent of the algorithm modules.
namespace pip::ref {

std::vector<std::uint64_t> ref_merge(const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b);

// Sequential Knuth shuffle with targets h[i] in [0, i], applied for i from
// hi down to lo (0-based).
void ref_knuth_apply(std::vector<std::uint64_t>& a,
                     const std::vector<std::uint64_t>& h, std::size_t lo,
                     std::size_t hi);

// Sequential Knuth shuffle drawing its own targets from std::mt19937_64.
std::vector<std::uint64_t> ref_shuffle(std::vector<std::uint64_t> a,
                                       std::uint64_t seed);

// Rejects graphs with isolated vertices, self loops or parallel edges.
void ref_check_graph(std::uint64_t n, const std::vector<graph::Edge>& edges);

std::set<graph::EdgeKey> ref_kruskal(std::uint64_t n,
                                     const std::vector<graph::Edge>& edges);

// label[v] for v in 1..n (label[0] unused); equal labels iff connected.
std::vector<std::uint64_t> ref_components(std::uint64_t n,
                                          const std::vector<graph::Edge>& edges);

// Unbounded Prim from u ordered by EdgeKey of the connecting edge; returns
// the first popped vertex with is_center[v] set.
std::optional<graph::vertex> ref_prim_first_center(
    std::uint64_t n, const std::vector<graph::Edge>& edges,
    const std::vector<bool>& is_center, graph::vertex u);

// Cluster of every vertex (first center in unbounded Prim order; 0 for
// vertices in components without a center), index 1..n.
std::vector<graph::vertex> ref_clusters(std::uint64_t n,
                                        const std::vector<graph::Edge>& edges,
                                        const std::vector<bool>& is_center);

// Kruskal by EdgeKey of the original edges over the cluster multigraph:
// vertices are clusters, edges are the edges whose endpoints lie in
// different clusters.
std::set<graph::EdgeKey> ref_cluster_msf(std::uint64_t n,
                                         const std::vector<graph::Edge>& edges,
                                         const std::vector<bool>& is_center);

// Position of pi in the recursive (first element, then reduced rest)
// enumeration of all permutations of 1..k, by exhaustive generation.
std::uint64_t ref_perm_rank(const std::vector<unsigned>& pi);

}  // namespace pip::ref
