#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>

#include "pip/acceptance.hpp"
#include "pip/random.hpp"

namespace pip::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool informational = false;
};

struct Ctx {
  const Config& cfg;

  bool full() const { return cfg.scale == Scale::full; }
  // Picks the full or smoke value of a count.
  std::size_t pick(std::size_t full_value, std::size_t smoke_value) const {
    return full() ? full_value : smoke_value;
  }
  std::uint64_t seed(std::uint64_t salt) const {
    return rng::hash(cfg.seed, rng::Stream::generator, 0xacce97, salt);
  }
};

// Mismatch counter that keeps the first failure for the report.
class Tally {
 public:
  void check(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    if (failed_++ == 0) first_ = what;
  }
  bool ok() const { return failed_ == 0; }
  std::size_t total() const { return total_; }
  std::size_t failed() const { return failed_; }
  std::string summary(const std::string& unit) const {
    std::ostringstream s;
    s << total_ - failed_ << "/" << total_ << " " << unit;
    if (failed_) s << "; first failure: " << first_;
    return s.str();
  }

 private:
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
  std::string first_;
};

// Upper-tail p of a chi-square statistic.
double chi_square_tail(double stat, double dof);

Outcome check_encoding_roundtrip(const Ctx& c);
Outcome check_perm_rank(const Ctx& c);
Outcome check_buffer_identity(const Ctx& c);
Outcome check_merge_correctness(const Ctx& c);
Outcome check_round_bound(const Ctx& c);
Outcome check_inversion_discipline(const Ctx& c);
Outcome check_shuffle_uniformity(const Ctx& c);
Outcome check_swap_order(const Ctx& c);
Outcome check_msf(const Ctx& c);
Outcome check_connectivity(const Ctx& c);
Outcome check_center_search(const Ctx& c);
Outcome check_offset_recovery(const Ctx& c);
Outcome check_inplace_accounting(const Ctx& c);
Outcome check_parallel_smoke(const Ctx& c);

}  // namespace pip::acceptance
