#pragma once

#include <stdexcept>
#include <string>

namespace heg {

/// Raised when a caller violates an operation's preconditions (dimension
/// mismatch, points from different manifolds, non-finite input, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace heg
