#pragma once

#include <stdexcept>
#include <string>

namespace cantor {

/// Invalid parameter or violated precondition (CLI exit code 2).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Query outside the domain of definition.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Requested scale/depth beyond what the configured geometry resolves.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iteration budget or convergence failure (CLI exit code 3).
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An embedded verification failed (CLI exit code 1).
struct CheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cantor
