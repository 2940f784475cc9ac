#pragma once

#include <stdexcept>
#include <string>

namespace elast {

/// Raised when a caller passes arguments that violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Degenerate element geometry (non-positive Jacobian determinant).
class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Solver breakdown: indefinite operator, failed factorization, bad spectral estimate.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Verification harness failure, e.g. a non-converged level in a convergence study.
class StudyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Command-line usage error; the CLI maps it to exit status 2.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output file.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Internal invariant violation (programming error rather than bad input).
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace elast
