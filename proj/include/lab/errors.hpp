#pragma once

#include <stdexcept>
#include <string>

namespace lab {

/// Bad input or configuration. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative method exhausted its budget. CLI maps this to exit code 3.
/// Callers that can recover (e.g. by switching method) may inspect the
/// best iterate carried by the throwing site.
class SolverFailure : public std::runtime_error {
public:
    explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A certified invariant failed. This is a bug trap, never a user error.
class InvariantViolation : public std::logic_error {
public:
    explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace lab
