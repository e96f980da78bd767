#pragma once

#include <stdexcept>
#include <string>

namespace convlab {

/// An input lies outside the domain an operation accepts (bad token,
/// hypothesis outside H, n = 0 where n >= 1 is required, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A problem, method or experiment was configured inconsistently.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation's structural precondition is not met (e.g. a stochastic mode
/// check on a world without a measure).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Exact computation would exceed the configured budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was given a method or problem whose hypothesis type it
/// cannot handle.
class TypeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace convlab
