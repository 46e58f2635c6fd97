#pragma once

#include <stdexcept>
#include <string>

namespace cogdyn {

// Bad input: malformed files, violated invariants, out-of-domain states.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The numbers went wrong: indefinite inertia, step-size collapse.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cogdyn
