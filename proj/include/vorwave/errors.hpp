#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vorwave {

// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed sample grids: odd length, too short, non-finite entries,
// mismatched sizes.
struct InvalidGridError : Error {
    using Error::Error;
};

// Input outside an operator's mathematical domain, e.g. a nonzero-mean
// function passed to an operator defined on zero-mean functions.
struct DomainError : Error {
    using Error::Error;
};

// Invalid run configuration (bad file, unknown key, out-of-range value).
struct ConfigError : Error {
    using Error::Error;
};

// Newton iteration failed to converge within the iteration budget.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, std::vector<double> history)
        : Error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

// Linear system matrix is numerically singular.
struct SingularJacobianError : Error {
    SingularJacobianError(const std::string& what, double sigma_min)
        : Error(what), smallest_singular_value(sigma_min) {}
    double smallest_singular_value = 0.0;
};

// A wave state failed a validity condition required by the requested
// operation (surface above the bed, graph property, no surface stagnation,
// nondegenerate conformal factor, ...). `condition` names the failed check.
struct RejectedStateError : Error {
    RejectedStateError(const std::string& what, std::string which)
        : Error(what), condition(std::move(which)) {}
    std::string condition;
};

}  // namespace vorwave
