#ifndef CFGADV_ERROR_HPP
#define CFGADV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cfgadv {

// Each category maps onto one CLI exit code.

/// Bad flags or configuration (exit 2).
class UsageError : public std::runtime_error {
 public:
  static constexpr int kExitCode = 2;
  using std::runtime_error::runtime_error;
};

/// Unreadable, malformed or missing data (exit 3).
class DataError : public std::runtime_error {
 public:
  static constexpr int kExitCode = 3;
  using std::runtime_error::runtime_error;
};

/// A structural or numerical invariant did not hold (exit 4).
class InvariantError : public std::runtime_error {
 public:
  static constexpr int kExitCode = 4;
  using std::runtime_error::runtime_error;
};

}  // namespace cfgadv

#endif  // CFGADV_ERROR_HPP
