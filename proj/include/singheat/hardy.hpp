#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "singheat/mesh.hpp"
#include "singheat/symtri.hpp"

namespace singheat {

/// Critical constant of the distance-to-boundary Hardy inequality.
inline constexpr double kCriticalMu = 0.25;

/// Discrete quadratic forms on interior-node vectors.
///   stiffness     sum over cells (u_{i+1}-u_i)^2 / h
///   inv_sq        sum h u_i^2 / delta_i^2          (diagonal)
///   inv_gamma     sum h u_i^2 / delta_i^gamma      (diagonal)
///   weighted_stiffness  sum over cells delta_mid^{2-gamma} (u_{i+1}-u_i)^2 / h
///   mass          sum h u_i^2                      (diagonal)
struct QuadForms {
    double gamma = 1.5;
    double h = 0.0;
    SymTridiag stiffness;
    Vec inv_sq;
    Vec inv_gamma;
    SymTridiag weighted_stiffness;
    Vec mass;

    /// u^T A u for a tridiagonal form, or u^T diag(d) u for a diagonal one.
    static double eval(const SymTridiag& a, std::span<const double> u);
    static double eval(std::span<const double> d, std::span<const double> u);
};

QuadForms build_forms(const Mesh1D& mesh, double gamma);

/// Smallest eigenvalue of the pencil (L, D) with D diagonal positive, plus the
/// norm of the scaled matrix so callers can state tolerances relative to it.
struct PencilMin {
    double value = 0.0;
    double scale = 0.0;
};

PencilMin pencil_min(const SymTridiag& lhs, std::span<const double> rhs_diag);

/// L = K - mu W2 - c * Wgamma (+ extra diagonal), returned as a tridiagonal matrix.
SymTridiag hardy_form(const QuadForms& f, double mu, double inv_gamma_coef, double mass_coef = 0.0);

/// min of K u.u / W2 u.u: the discrete Hardy constant of the mesh.
double rayleigh_hardy(const Mesh1D& mesh);

double find_A2(const Mesh1D& mesh, double mu, double gamma, double A1);
double find_A3(const Mesh1D& mesh, double mu, double gamma);
/// A4 for a fixed A5.
double find_A4(const Mesh1D& mesh, double mu, double gamma, double A1, double A5);

struct A45Entry {
    double A5 = 0.0;
    double A4_coarse = 0.0;
    double A4_fine = 0.0;
    bool stable = false;
};

struct A45Result {
    bool feasible = false;
    double A4 = 0.0;
    double A5 = 0.0;
    std::vector<A45Entry> tried;
};

/// Walks A5 over 1, 1/2, 1/4, ... (grid_size entries) and returns the first A5
/// whose A4 is stable under one mesh doubling. feasible = false when none is.
A45Result find_A4_A5(const Mesh1D& mesh, double mu, double gamma, double A1,
                     std::size_t grid_size = 11);

/// Values v_coarse -> v_fine count as refinement-stable when they differ by
/// less than 20% (two effectively zero values are stable).
bool refinement_stable(double coarse, double fine, double zero_floor);

/// Smallest A with lambda_min(K - W2/4 + A M - A1 Wgamma, M) >= -tol by
/// bisection, tol = 1e-10 * scale. Throws BracketFailure if no upper bracket
/// is found.
double compute_A0_gamma(const Mesh1D& mesh, double gamma, double A1);

struct NormEquivalence {
    double min_lower_slack = 0.0;  ///< min over samples of (Phi - left) / Phi
    double min_upper_slack = 0.0;  ///< min over samples of (right - Phi) / Phi
    double upper_factor = 1.0;     ///< 1 + mu^- / mu*
    double lower_factor = 1.0;     ///< 1 - mu^+ / mu*
    std::size_t samples = 0;
    bool passed = true;
    std::optional<std::size_t> witness;  ///< index of the first violating sample
};

/// Checks
///   (1 - mu+/mu*)(K + A0 M) + (mu+/mu*) A1 Wgamma <= Phi <= (1 + mu-/mu*)(K + A0 M)
/// with Phi = K - mu W2 + A0 M on seeded random vectors (white noise and
/// smooth random sine series alternately).
NormEquivalence check_norm_equivalence(const Mesh1D& mesh, double mu, double gamma, double A1,
                                       double A0, std::size_t sample_count, std::uint64_t seed);

struct A1Sweep {
    double A1 = 0.0;
    bool found = false;
    /// (A1, A2 per mesh) for every grid value tried
    std::vector<std::pair<double, std::vector<double>>> table;
};

/// Operative A1: the largest value on the dyadic grid 2^k, k = kmax..kmin, whose
/// A2 is refinement-stable across every consecutive pair of mesh sizes.
A1Sweep operative_A1(double mu, double gamma, std::span<const std::size_t> mesh_sizes,
                     int kmax = 6, int kmin = -10);

struct HardyReport {
    double mu = 0.0;
    double gamma = 1.5;
    std::size_t mesh_n = 0;
    double rayleigh_min = 0.0;
    double A1 = 0.0;
    double A2 = 0.0;
    double A3 = 0.0;
    double A4 = 0.0;
    double A5 = 0.0;
    double A0_gamma = 0.0;
    bool converged = true;
};

void write_hardy_csv_header(std::ostream& os);
void write_hardy_csv_row(std::ostream& os, const HardyReport& r);

}  // namespace singheat
