#pragma once
#ifndef TOPL_ERRORS_HPP
#define TOPL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace topl {

/// Invalid argument or configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exhaustive search would exceed its configured enumeration cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A guaranteed-feasible step turned out infeasible; indicates a bug upstream.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ParameterError(message);
}

}  // namespace topl

#endif  // TOPL_ERRORS_HPP
