#pragma once

#include <stdexcept>

namespace rectex {

// Desk-scale enumeration guard. Operations that would enumerate an
// unreasonable number of subsets throw this instead of running away.
class guard_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Optimization-size guard. Kept separate from guard_error because the CLI
// reports it with its own exit code.
class solver_guard_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sign-triple compression: the third weight vector is not a linear
// combination of the first two.
class not_coplanar_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Sign-triple compression: the weights are dependent and the bias satisfies
// the same dependency, so the construction's scale factor does not exist.
class bias_dependent_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rectex
