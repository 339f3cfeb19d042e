#pragma once

#include <stdexcept>
#include <string>

namespace certiq {

// Base error for bad inputs (shapes, files, arguments). Recoverable by the caller.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an internal consistency check fails (invalid cut, broken KKT
// certificate, counterexample that does not replay). The CLI maps it to exit 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace certiq
