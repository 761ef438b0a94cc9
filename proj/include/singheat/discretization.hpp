#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "singheat/mesh.hpp"
#include "singheat/symtri.hpp"

namespace singheat {

enum class Regularization { None, Shift, Quadratic };

const char* to_string(Regularization r);
/// Accepts "none", "shift", "quadratic". Throws InvalidConfig otherwise.
Regularization parse_regularization(const std::string& s);

/// Coefficient of the inverse-square potential and how it is cut off near the
/// boundary: none -> mu/delta^2, shift(m) -> mu/(delta + 1/m)^2,
/// quadratic(eps) -> mu/(delta^2 + eps^2).
struct OperatorSpec {
    double mu = 0.0;
    Regularization reg = Regularization::None;
    double reg_param = 0.0;  ///< m for shift, eps for quadratic
};

/// Potential value at distance d from the boundary.
double potential_at(const OperatorSpec& spec, double d);

/// Stored operator -u'' - V u on interior nodes with Dirichlet ends.
struct TridiagOperator {
    OperatorSpec spec;
    SymTridiag matrix;
    Vec potential;
    double h = 0.0;
    /// true when the unregularized potential was used
    bool raw = false;

    std::size_t size() const { return matrix.size(); }
    Vec apply(std::span<const double> x) const { return matrix.apply(x); }
};

TridiagOperator assemble(const OperatorSpec& spec, const Mesh1D& mesh);

enum class TimeScheme { ImplicitEuler, CrankNicolson };

struct TimeGrid {
    double T = 0.0;
    std::size_t nt = 0;
    double dt = 0.0;
    TimeScheme scheme = TimeScheme::ImplicitEuler;

    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// Throws InvalidConfig unless T > 0 and nt >= 2.
TimeGrid make_time_grid(double T, std::size_t nt, TimeScheme scheme = TimeScheme::ImplicitEuler);

/// All time levels 0..nt of a state or adjoint solution.
using Trajectory = std::vector<Vec>;

/// One-step propagator of the theta scheme
///   (I + th dt A) u^{k+1} = (I - (1-th) dt A) u^k + dt f_k
/// with th = 1 (implicit Euler) or 1/2 (Crank-Nicolson). The control entry
/// f_k is the source acting over (t_k, t_{k+1}], so it is stored per step
/// (k = 0..nt-1) and is applied at level k+1.
///
/// The adjoint sweeps apply the exact transpose of this propagator, so the
/// discrete duality identity holds to rounding.
class Stepper {
public:
    Stepper(const TridiagOperator& op, const TimeGrid& tg);

    const TimeGrid& grid() const { return tg_; }
    std::size_t size() const { return n_; }

    /// u^{k+1} from u^k and source f (f may be empty for no source)
    void step(std::span<const double> uk, std::span<const double> f, std::span<double> out) const;

    /// Full forward solve. f holds nt step sources or is empty. Sources are
    /// multiplied by mask (when non-empty) before use.
    Trajectory forward(std::span<const double> u0, const std::vector<Vec>& f,
                       std::span<const std::uint8_t> mask = {}) const;
    /// Final state only, no trajectory storage.
    Vec forward_final(std::span<const double> u0, const std::vector<Vec>& f,
                      std::span<const std::uint8_t> mask = {}) const;

    /// Backward solve v^{nt} = vT, v^k = P^T v^{k+1}.
    Trajectory adjoint(std::span<const double> vT) const;

    /// Vector paired with the source f_k in the duality identity:
    /// g_k = S v^{k+1} with S = (I + th dt A)^{-1}. For implicit Euler g_k = v^k.
    std::vector<Vec> source_pairing(const Trajectory& v) const;

    /// Backward recurrence with sources: q^{nt} = c_nt y^{nt},
    /// q^j = c_j y^j + P^T q^{j+1}; returns dt S q^{k+1} for k = 0..nt-1,
    /// i.e. the gradient of 1/2 sum_j c_j |y^j|^2 with respect to f_k when
    /// y is driven by f from zero data (inner products without the h factor).
    std::vector<Vec> adjoint_sources(const Trajectory& y, std::span<const double> c) const;

    /// x <- S x
    void solve_implicit(std::span<double> x) const { factor_.solve_in_place(x); }
    /// x <- (I - (1-th) dt A) x
    void apply_explicit(std::span<const double> x, std::span<double> out) const;

private:
    TimeGrid tg_;
    std::size_t n_;
    double theta_;
    SymTridiag a_;
    TridiagFactor factor_;
};

/// Convenience wrappers matching the stepper.
Trajectory step_forward(const TridiagOperator& op, const TimeGrid& tg, std::span<const double> u0,
                        const std::vector<Vec>& f, std::span<const std::uint8_t> mask = {});
Trajectory step_adjoint(const TridiagOperator& op, const TimeGrid& tg, std::span<const double> vT);

struct DualityCheck {
    double residual = 0.0;
    /// sum of the magnitudes of the three terms, for relative comparisons
    double scale = 0.0;

    double relative() const { return scale > 0.0 ? residual / scale : residual; }
};

/// |<u(T), vT> - sum_k dt <f_k, g_k>_omega - <u0, v(0)>| with h-weighted
/// inner products, where g_k is the adjoint vector paired with f_k. Throws
/// Dimension on grid or length mismatch.
DualityCheck check_duality(const Mesh1D& mesh, const Stepper& stepper, const Trajectory& u,
                     const Trajectory& v, const std::vector<Vec>& f, std::span<const double> u0,
                     std::span<const double> vT, std::span<const std::uint8_t> mask);

/// Trajectory dump with columns k,t,node,value.
void write_trajectory_csv(std::ostream& os, const Mesh1D& mesh, const TimeGrid& tg,
                          const Trajectory& traj);

}  // namespace singheat
