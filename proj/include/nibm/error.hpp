#pragma once

#include <stdexcept>
#include <string>

namespace nibm {

// Base for every failure raised by the library. The CLI maps the subclasses to
// distinct exit codes (see README).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments or violated preconditions (kappa too small, t <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Evaluation point coincides with an atom.
class PoleError : public Error {
public:
    using Error::Error;
};

// Query outside a tabulated or bracketed range.
class RangeError : public Error {
public:
    using Error::Error;
};

// Quadrature or root finder failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Residue sum lost too many digits for the chosen precision policy.
class PrecisionError : public Error {
public:
    PrecisionError(const std::string& what, double cancellation_digits)
        : Error(what), digits_(cancellation_digits) {}
    double cancellation_digits() const { return digits_; }

private:
    double digits_;
};

// Malformed configuration text or files.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace nibm
