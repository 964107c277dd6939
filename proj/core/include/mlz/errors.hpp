#pragma once

#include <stdexcept>
#include <string>

namespace mlz {

/// Base class of all exceptions thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, invalid model data, out-of-domain arguments.
/// The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

/// A computation that was asked for could not be completed to the requested
/// accuracy. The CLI maps these to exit code 1.
class ComputeError : public Error {
public:
    using Error::Error;
};

// ---- model validation ----

class ValidationError : public InputError {
public:
    using InputError::InputError;
};

class DuplicateSlopeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class AsymmetricCouplingError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonzeroDiagonalError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DimensionMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Model-file syntax error, with 1-based source position.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, int line, int column)
        : InputError(what + " (line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ")"),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// ---- special functions ----

class DomainError : public InputError {
public:
    using InputError::InputError;
};

/// Argument sits exactly on a branch point (z = +-i for the arctangent).
class BranchPointError : public DomainError {
public:
    using DomainError::DomainError;
};

/// The Q integral diverges when alpha+beta = 0 or alpha+gamma = 0.
class ResonantInputError : public DomainError {
public:
    using DomainError::DomainError;
};

/// The closed-form resonant limit requires p = j or l = k.
class NotResonantError : public DomainError {
public:
    using DomainError::DomainError;
};

class IndexError : public InputError {
public:
    using InputError::InputError;
};

// ---- numerics ----

/// Quadrature tail extrapolation did not stabilize within the panel budget.
class ConvergenceFailure : public ComputeError {
public:
    using ComputeError::ComputeError;
};

/// Infinite-time ladder levels kept disagreeing beyond the tolerance budget.
class NoConvergence : public ComputeError {
public:
    using ComputeError::ComputeError;
};

class StepSizeUnderflow : public ComputeError {
public:
    using ComputeError::ComputeError;
};

class NonUnitaryDrift : public ComputeError {
public:
    using ComputeError::ComputeError;
};

}  // namespace mlz
