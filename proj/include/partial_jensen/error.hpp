#pragma once

#include <stdexcept>
#include <string>

namespace pj {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the requested operation
/// (e.g. a negative eigenvalue fed to a negative power).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operand dimensions are incompatible or exceed a configured cap.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An iterative method exhausted its budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace pj
