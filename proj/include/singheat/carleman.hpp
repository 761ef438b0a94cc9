#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "singheat/discretization.hpp"
#include "singheat/mesh.hpp"
#include "singheat/weights.hpp"

namespace singheat {

/// Both sides of the Carleman inequality on one adjoint trajectory. The
/// integrands carry e^{-2 R sigma} with sigma near 1e60, so every integral is
/// kept as a natural logarithm (-inf for an exact zero) shifted by the common
/// reference 2 R min(theta) (C_lambda - max tau). Both sides share the
/// reference, so the ratio is unaffected.
struct CarlemanSides {
    std::array<long double, 5> log_lhs_terms{};  ///< Q, layer gradient, O gradient, layer v^2, O v^2
    std::array<long double, 2> log_rhs_terms{};  ///< omega0 v^2, omega0 gradient
    long double log_lhs = 0.0L;
    long double log_rhs = 0.0L;
    /// LHS/RHS; 0 when both vanish, +inf when only the right side does
    double ratio = 0.0;
};

struct CarlemanReport {
    double log_reference = 0.0;  ///< true log integral = logged value - log_reference
    std::vector<CarlemanSides> runs;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    std::size_t property_failures = 0;  ///< runs with RHS = 0 < LHS
};

/// Quadrature of every term over time levels 1..nt-1 (weight dt) and interior
/// nodes (weight h), with centered v_x and zero boundary values. Runs are
/// evaluated in parallel. Throws Dimension when a run does not match the
/// mesh or grid, SingularTime when T differs from the weight horizon.
CarlemanReport empirical_carleman(const Mesh1D& mesh, const WeightFields& f, const TimeGrid& tg,
                                  const std::vector<Trajectory>& runs);

/// Adjoint trajectories from seeded white-noise terminal data of unit h-norm.
std::vector<Trajectory> random_adjoint_runs(const Mesh1D& mesh, const TridiagOperator& op, const TimeGrid& tg,
                                            std::size_t count, std::uint64_t seed);

struct R0Search {
    bool found = false;
    double R0 = 0.0;
    std::vector<std::pair<double, double>> history;  ///< (R, max ratio)
};

/// Doubles R from R_start until doubling no longer raises the max ratio by
/// more than 2x, at most max_doublings times.
R0Search find_R0(const Mesh1D& mesh, const WeightFields& f, const TimeGrid& tg,
                 const std::vector<Trajectory>& runs, double R_start = 1.0, int max_doublings = 30);

/// Rows run,log_lhs,log_rhs,ratio.
void write_carleman_csv(std::ostream& os, const CarlemanReport& r);

}  // namespace singheat
