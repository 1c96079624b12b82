#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "pip/graph.hpp"
#include "pip/workload.hpp"

using namespace pip;
using namespace pip::workload;

namespace {

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("array kinds") {
  const auto r = make_array(ArrayKind::random_distinct, 5000, 7);
  CHECK(r.left == 5000);
  auto s = r.data;
  std::sort(s.begin(), s.end());
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  CHECK(s != r.data);
  const auto p = make_array(ArrayKind::sorted_pair, 5001, 7);
  CHECK(p.left == 2500);
  CHECK(std::is_sorted(p.data.begin(), p.data.begin() + 2500));
  CHECK(std::is_sorted(p.data.begin() + 2500, p.data.end()));
  CHECK(make_array(ArrayKind::sorted_pair, 5001, 7).data == p.data);
  CHECK(parse_array_kind("sorted-pair") == ArrayKind::sorted_pair);
  CHECK_FALSE(parse_array_kind("sorted"));
}

TEST_CASE("array files round trip, including empty ones") {
  const auto path = temp_file("pip_workload_test.pipa");
  for (std::size_t n : {0u, 1u, 1000u}) {
    const auto f = make_array(ArrayKind::sorted_pair, n, 3);
    save_array(path, f);
    const auto g = load_array(path);
    CHECK(g.left == f.left);
    CHECK(g.data == f.data);
  }
  std::FILE* out = std::fopen(path.c_str(), "wb");
  std::fputs("PIPX", out);
  std::fclose(out);
  CHECK_THROWS_AS(load_array(path), InputError);
  std::remove(path.c_str());
}

TEST_CASE("graph kinds") {
  const auto path = graph::CsrGraph::from_edges(3, make_graph(GraphKind::path, 3, 0, 1));
  CHECK(path.m() == 2);
  CHECK(path.offsets()[0] == 1);
  CHECK(path.offsets()[1] == 3);
  CHECK(path.offsets()[2] == 4);
  const auto grid = make_graph(GraphKind::grid, 12, 0, 1);
  CHECK(grid.size() == 17);  // 3 x 4: 3*3 across, 2*4 down
  for (GraphKind k : {GraphKind::gnm, GraphKind::grid, GraphKind::path, GraphKind::dumbbell}) {
    const auto e = make_graph(k, 60, 150, 9);
    CHECK_NOTHROW(graph::CsrGraph::from_edges(60, e));
    CHECK(make_graph(k, 60, 150, 9).size() == e.size());
  }
  CHECK(parse_graph_kind("dumbbell") == GraphKind::dumbbell);
  CHECK_FALSE(parse_graph_kind("tree"));
}
