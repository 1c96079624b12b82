#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>

#include <boost/math/distributions/chi_squared.hpp>

#include "checks.hpp"

namespace pip::acceptance {

namespace {

struct Criterion {
  int id;
  const char* name;
  double limit;  // seconds
  Outcome (*fn)(const Ctx&);
};

constexpr Criterion kCriteria[] = {
    {1, "encoding roundtrip", 5, check_encoding_roundtrip},
    {2, "permutation rank bijection", 10, check_perm_rank},
    {3, "buffer identity", 10, check_buffer_identity},
    {4, "merge correctness", 120, check_merge_correctness},
    {5, "end-merge round bound", 120, check_round_bound},
    {6, "inversion discipline", 60, check_inversion_discipline},
    {7, "shuffle uniformity", 300, check_shuffle_uniformity},
    {8, "swap-order invariance", 60, check_swap_order},
    {9, "msf oracle equivalence", 300, check_msf},
    {10, "connectivity oracle equivalence", 120, check_connectivity},
    {11, "center-search oracle", 120, check_center_search},
    {12, "offset recoverability", 60, check_offset_recovery},
    {13, "in-place accounting", 120, check_inplace_accounting},
    {14, "parallel smoke", 300, check_parallel_smoke},
};

}  // namespace

double chi_square_tail(double stat, double dof) {
  if (dof < 1) return 1;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

std::optional<Scale> parse_scale(std::string_view s) {
  if (s == "smoke") return Scale::smoke;
  if (s == "full") return Scale::full;
  return std::nullopt;
}

std::optional<Fault> parse_fault(std::string_view s) {
  if (s == "none") return Fault::none;
  if (s == "codec") return Fault::codec;
  return std::nullopt;
}

std::string format(const Result& r) {
  char head[160];
  std::snprintf(head, sizeof head, "%s %2d %-32s %8.2fs / %4.0fs  ",
                r.pass ? "PASS" : (r.informational ? "INFO" : "FAIL"), r.id,
                r.name.c_str(), r.seconds, r.limit);
  return head + r.detail;
}

std::vector<Result> run(const Config& cfg,
                        const std::function<void(const Result&)>& on_result) {
  std::vector<Result> out;
  const Ctx ctx{cfg};
  for (const auto& c : kCriteria) {
    if (!cfg.only.empty() && std::find(cfg.only.begin(), cfg.only.end(), c.id) == cfg.only.end())
      continue;
    Result r;
    r.id = c.id;
    r.name = c.name;
    r.limit = c.limit;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn(ctx);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.detail = o.detail;
    r.informational = o.informational && !o.pass;
    r.pass = o.pass && r.seconds < r.limit;
    if (o.pass && !r.pass) r.detail += "; over time limit";
    out.push_back(r);
    if (on_result) on_result(r);
  }
  return out;
}

bool all_passed(const std::vector<Result>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const Result& r) { return r.pass || r.informational; });
}

}  // namespace pip::acceptance
