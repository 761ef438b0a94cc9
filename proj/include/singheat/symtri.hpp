#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "singheat/mesh.hpp"

namespace singheat {

/// Symmetric tridiagonal matrix: diag has n entries, off has n-1 (sub = super).
struct SymTridiag {
    Vec diag;
    Vec off;

    std::size_t size() const { return diag.size(); }
    void apply(std::span<const double> x, std::span<double> y) const;
    Vec apply(std::span<const double> x) const;
    /// max row sum of |entries|
    double norm_inf() const;
    /// Gershgorin interval [lo, hi] containing the spectrum.
    std::pair<double, double> gershgorin() const;
};

/// Returns D^{-1/2} A D^{-1/2} for a positive diagonal D. Turns the pencil
/// (A, D) into a standard problem with the same eigenvalues.
SymTridiag scale_by_diagonal(const SymTridiag& a, std::span<const double> d);

/// LU factors of a symmetric tridiagonal matrix without pivoting. Used for
/// the repeated implicit solves of the time steppers.
class TridiagFactor {
public:
    /// Throws SolverBreakdown (with the supplied step tag) when a pivot falls
    /// below 1e-14 * max|diag|.
    explicit TridiagFactor(const SymTridiag& a, std::size_t step_tag = 0);

    void solve_in_place(std::span<double> x) const;
    std::size_t size() const { return pivot_.size(); }

private:
    Vec pivot_;
    Vec lower_;
    Vec upper_;
};

/// Number of eigenvalues strictly below the shift (Sturm count through the
/// LDL^T recurrence).
std::size_t sturm_count(const SymTridiag& a, double shift);

struct EigenPair {
    double value = 0.0;
    Vec vector;  ///< Euclidean unit norm, largest component made positive
    std::size_t bisection_steps = 0;
    std::size_t inverse_steps = 0;
    double residual = 0.0;  ///< ||A x - value x||_2
};

/// k-th smallest eigenvalue (k = 0 is the minimum) by bisection on the
/// Sturm count. Accurate to a few ulps of ||A||.
double eigenvalue_bisect(const SymTridiag& a, std::size_t k, std::size_t* steps = nullptr);

/// Eigenpair by bisection followed by inverse iteration with a Rayleigh
/// quotient refinement. Throws EigenNonConvergence when the residual does
/// not reach rel_tol * ||A||_inf.
EigenPair eigenpair(const SymTridiag& a, std::size_t k, double rel_tol = 1e-10,
                    std::size_t max_iter = 50);

/// Smallest eigenvalue of the pencil (A, D) for a positive diagonal D.
double min_generalized_eigenvalue(const SymTridiag& a, std::span<const double> d);

}  // namespace singheat
