#pragma once

#include <stdexcept>
#include <string>

namespace nsv {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Input data rejected at construction (kernel tables, runfiles, snapshots).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operands live on different spectral grids.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested mode not available for this object (e.g. Prony on a table).
struct UnsupportedError : std::logic_error {
    using std::logic_error::logic_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Nonfinite state detected during time stepping.
struct BlowUpError : std::runtime_error {
    BlowUpError(const std::string& what, double t_last, double e_last)
        : std::runtime_error(what), t(t_last), energy(e_last) {}
    double t;
    double energy;
};

}  // namespace nsv
