#pragma once

#include <stdexcept>
#include <string>

namespace mobsim {

// Error categories map onto the CLI exit-code contract:
//   UsageError -> 2, DataError -> 3, InfeasibleError -> 4.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (panels, configs, file I/O).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically infeasible request (e.g. moment inversion outside the
// admissible parameter region).
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mobsim
