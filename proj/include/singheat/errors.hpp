#pragma once

#include <stdexcept>
#include <string>

namespace singheat {

enum class ErrorKind {
    InvalidMesh,
    RegionNesting,
    R0Overlap,
    SolverBreakdown,
    Dimension,
    EigenNonConvergence,
    UnderResolved,
    SingularTime,
    InfeasibleSlope,
    BracketFailure,
    NotApplicable,
    PropertyFailure,
    InvalidConfig,
    UnknownExperiment,
    UnknownKey,
};

const char* to_string(ErrorKind kind);

/// Base error for the library. Carries a machine-readable kind so the CLI can
/// map failures onto exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for failures of numerical kernels (as opposed to bad input).
    bool is_numerical() const noexcept {
        switch (kind_) {
        case ErrorKind::SolverBreakdown:
        case ErrorKind::EigenNonConvergence:
        case ErrorKind::BracketFailure:
        case ErrorKind::PropertyFailure:
            return true;
        default:
            return false;
        }
    }

private:
    ErrorKind kind_;
};

/// Implicit solve hit a zero pivot. Reports the time step at which it happened.
class SolverBreakdown : public Error {
public:
    SolverBreakdown(std::size_t step, std::size_t row, double pivot);
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidMesh: return "invalid-mesh";
    case ErrorKind::RegionNesting: return "region-nesting";
    case ErrorKind::R0Overlap: return "r0-overlap";
    case ErrorKind::SolverBreakdown: return "solver-breakdown";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::EigenNonConvergence: return "eigen-non-convergence";
    case ErrorKind::UnderResolved: return "under-resolved";
    case ErrorKind::SingularTime: return "singular-time";
    case ErrorKind::InfeasibleSlope: return "infeasible-slope";
    case ErrorKind::BracketFailure: return "bracket-failure";
    case ErrorKind::NotApplicable: return "not-applicable";
    case ErrorKind::PropertyFailure: return "property-failure";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::UnknownExperiment: return "unknown-experiment";
    case ErrorKind::UnknownKey: return "unknown-key";
    }
    return "unknown";
}

inline SolverBreakdown::SolverBreakdown(std::size_t step, std::size_t row, double pivot)
    : Error(ErrorKind::SolverBreakdown,
            "tridiagonal solve broke down at time step " + std::to_string(step) +
                " (row " + std::to_string(row) + ", pivot " + std::to_string(pivot) + ")"),
      step_(step) {}

}  // namespace singheat
