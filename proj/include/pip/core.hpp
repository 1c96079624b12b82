#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pip {

using word = std::uint64_t;

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed external input (files, graphs, CLI values).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal state found corrupted (e.g. a parent cycle in a codec).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace pip
