#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "singheat/discretization.hpp"
#include "singheat/mesh.hpp"

namespace singheat {

/// Penalized HUM: minimize over terminal adjoint data
///   1/2 sum_k dt |v|^2_omega + <u0, v(0)> + penalty/2 |vT|^2.
struct HumProblem {
    Mesh1D mesh;
    TridiagOperator op;
    TimeGrid tg;
    std::vector<std::uint8_t> mask;  ///< control region nodes
    Vec u0;
    double penalty = 1e-8;
    double cg_tol = 1e-10;
    std::size_t cg_max_iter = 1000;
};

struct HumResult {
    Vec vT_star;
    std::vector<Vec> control;  ///< f_k = chi_omega g_k, k = 0..nt-1
    Vec final_state;
    double final_norm = 0.0;
    double free_final_norm = 0.0;  ///< |u(T)| without control
    double control_cost = 0.0;     ///< sum_k dt |f_k|^2
    double gram_min_eig_est = 0.0;
    std::size_t cg_iters = 0;
    bool converged = false;
    double el_residual = 0.0;  ///< |(Lambda + penalty) vT + u_free(T)|, recomputed
};

struct ObservabilityEstimate {
    double C_T_est = 0.0;
    std::size_t iterations = 0;
    bool unbounded = false;  ///< Gramian numerically null along the witness
    Vec witness;
};

/// Gramian and solver context: owns the factored stepper so repeated
/// applications share one factorization.
class HumSolver {
public:
    explicit HumSolver(HumProblem p);

    const HumProblem& problem() const { return p_; }
    const Stepper& stepper() const { return stepper_; }

    /// Lambda vT = u_f(T) with f = chi_omega (adjoint of vT), zero initial data.
    Vec gramian_apply(std::span<const double> vT) const;
    /// <Lambda vT, vT> computed as the control-side quadrature sum_k dt |g_k|^2_omega
    double gramian_energy(std::span<const double> vT) const;
    /// Control generated by the terminal datum.
    std::vector<Vec> control_from(std::span<const double> vT) const;
    /// u(T) for the given initial datum with no control.
    Vec free_final(std::span<const double> u0) const;
    /// v(0) for the terminal datum.
    Vec adjoint_initial(std::span<const double> vT) const;

    HumResult solve() const;

    /// <(Lambda + penalty) vT* + u_free(T), wT>: the discrete Euler-Lagrange
    /// identity tested against the terminal datum wT (zero at the optimum).
    double euler_lagrange(const HumResult& r, std::span<const double> wT) const;

    /// Power iteration on (Lambda + penalty)^{-1} E^T E, E: vT -> v(0). Reports
    /// the largest ratio |v(0)|^2 / <Lambda vT, vT> seen.
    ObservabilityEstimate estimate_CT(std::size_t iters) const;

private:
    HumProblem p_;
    Stepper stepper_;
};

/// One CSV row per run: mu,reg,reg_param,T,n,nt,penalty,final_norm,control_cost,cg_iters,CT_est
void write_control_csv_header(std::ostream& os);
void write_control_csv_row(std::ostream& os, const HumProblem& p, const HumResult& r, double ct_est);

/// Gnuplot-friendly control trajectory: t, x, f blocks separated by blank lines.
void write_control_dat(std::ostream& os, const HumProblem& p, const HumResult& r);

}  // namespace singheat
