#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "singheat/discretization.hpp"
#include "singheat/mesh.hpp"

namespace singheat {

/// Quadratic cost of a control f supported in omega for the operator with the
/// quadratic cutoff mu/(delta^2 + eps^2):
///   J(f) = 1/2 sum_j c_j |u^j|^2 + 1/2 sum_k dt |f_k|^2
/// with trapezoid weights c_j in time and h-weighted norms in space.
struct CostProblem {
    std::size_t n = 800;
    double mu = 0.5;
    double eps = 0.05;
    double T = 0.5;
    std::size_t nt = 200;
    TimeScheme scheme = TimeScheme::ImplicitEuler;
    Vec u0;  ///< empty: the ground state, unit L2 norm
    std::vector<std::uint8_t> mask;  ///< control support, one entry per node; all zero: no control
    double cg_tol = 1e-8;
    std::size_t cg_max_iter = 2000;
};

struct LowerBound {
    bool applicable = false;  ///< false when lambda0 >= 0
    double value = 0.0;
};

struct CostResult {
    double J_opt = 0.0;
    double J_free = 0.0;  ///< value at f = 0
    double lambda0 = 0.0;
    double eigen_residual = 0.0;  ///< |A phi - lambda0 phi| in the h-norm
    double phi0_l2_omega_sq = 0.0;
    Vec rho_traj;   ///< <u^j, phi0>, j = 0..nt
    Vec zeta_traj;  ///< <f_k, phi0>, k = 0..nt-1
    Vec state_norms;  ///< |u^j|, j = 0..nt
    std::vector<Vec> control;
    LowerBound analytic_lower;
    std::size_t cg_iters = 0;
    bool converged = false;
    std::vector<double> J_history;  ///< J after every CG iteration, starting at f = 0
};

/// Throws UnderResolved unless h <= eps/10, InvalidConfig for eps <= 0 or T <= 0,
/// Dimension on mask or datum length mismatch.
CostResult minimize_cost(const CostProblem& p);

/// J, projections and bound for a given control (masked before use).
CostResult evaluate_cost(const CostProblem& p, const std::vector<Vec>& f);

/// Lower bound for the optimal cost when the ground state grows: with
/// kappa = -lambda0 > 0,
///   min{ (e^{2 kappa T} - 1)/(16 kappa), kappa (1 - e^{-2 kappa T})/(4 |phi0|^2_omega) }.
/// The first term tends to T/8 as kappa -> 0.
LowerBound analytic_lower_bound(double lambda0, double phi0_l2_omega_sq, double T);

struct DuhamelCheck {
    double residual = 0.0;   ///< sum_k |rho^{k+1} - rho^k + dt lambda0 rho_th - dt zeta_k|
    double tolerance = 0.0;  ///< bound from the eigen residual plus rounding
    bool passed() const { return residual <= tolerance; }
};

/// Projected ODE check rho' + lambda0 rho = zeta along the computed trajectory.
DuhamelCheck verify_duhamel(const CostProblem& p, const CostResult& r);

/// Independent minimizations over a strictly decreasing eps list, in parallel.
std::vector<CostResult> cost_sweep(const CostProblem& base, std::span<const double> eps_list);

/// Rows mu,eps,T,lambda0,J_opt,analytic_lower,cg_iters (nan when the bound does not apply).
void write_cost_csv_header(std::ostream& os);
void write_cost_csv_row(std::ostream& os, const CostProblem& p, const CostResult& r);

}  // namespace singheat
