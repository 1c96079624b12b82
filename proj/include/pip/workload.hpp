#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pip/core.hpp"
#include "pip/graph_types.hpp"
#include "pip/random.hpp"

// Input generators and array files shared by the CLI and the acceptance
// suite.
namespace pip::workload {

// n distinct keys in [lo, hi), ascending. Keys stay clear of the merge
// padding sentinels.
std::vector<word> distinct_sorted(rng::SplitMix& g, std::size_t n,
                                  word lo = word{1} << 20,
                                  word hi = word{1} << 62);

// Two ascending runs whose union is a random interleaving of distinct keys.
void sorted_pair(rng::SplitMix& g, std::size_t na, std::size_t nb,
                 std::vector<word>& a, std::vector<word>& b);

// Distinct keys in random order.
std::vector<word> random_distinct(rng::SplitMix& g, std::size_t n);

enum class ArrayKind { random_distinct, sorted_pair };
std::optional<ArrayKind> parse_array_kind(std::string_view s);

// An array file: "PIPA", a version word, the split point (left run length;
// n for unsplit arrays), n, then the keys.
struct ArrayFile {
  std::size_t left = 0;
  std::vector<word> data;
};

ArrayFile make_array(ArrayKind kind, std::size_t n, std::uint64_t seed);
void save_array(const std::string& path, const ArrayFile& f);
ArrayFile load_array(const std::string& path);

enum class GraphKind { gnm, grid, path, dumbbell };
std::optional<GraphKind> parse_graph_kind(std::string_view s);

// Simple graphs without isolated vertices. gnm draws m edges over one
// component; grid uses rows of floor(sqrt n) vertices; path ignores m;
// dumbbell joins two gnm halves of about m/2 edges by a single edge.
std::vector<graph::Edge> make_graph(GraphKind kind, graph::vertex n,
                                    std::size_t m, std::uint64_t seed,
                                    graph::weight max_weight = 16);

}  // namespace pip::workload
