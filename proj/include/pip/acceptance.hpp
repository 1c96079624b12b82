#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pip::acceptance {

// smoke trims sample counts and sizes so a full run stays under a minute;
// thresholds and tolerances are the same at both scales.
enum class Scale { smoke, full };
std::optional<Scale> parse_scale(std::string_view s);

enum class Fault { none, codec };
std::optional<Fault> parse_fault(std::string_view s);

struct Config {
  Scale scale = Scale::full;
  std::uint64_t seed = 1;
  Fault fault = Fault::none;
  std::vector<int> only;  // criterion ids; empty runs all
};

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  // Failures that do not count against the run (hardware too small).
  bool informational = false;
  double seconds = 0;
  double limit = 0;
  std::string detail;
};

std::string format(const Result& r);

std::vector<Result> run(const Config& cfg,
                        const std::function<void(const Result&)>& on_result = {});

// True when every non-informational result passed.
bool all_passed(const std::vector<Result>& results);

}  // namespace pip::acceptance
