#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "singheat/discretization.hpp"
#include "singheat/mesh.hpp"

namespace singheat {

struct Localization {
    double beta = 0.0;
    double l2 = 0.0;  ///< L2 norm of phi0 on {delta >= beta}
    double h1 = 0.0;  ///< H1 norm on the same node set, forward differences
};

/// Ground state of -u'' - mu/(delta^2 + eps^2) u on the mesh.
struct SpectralPoint {
    double mu = 0.0;
    double eps = 0.0;
    std::size_t n = 0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    Vec phi0;  ///< sum h phi^2 = 1, nonnegative
    double residual = 0.0;  ///< ||A phi - lambda phi||_2 for the Euclidean-unit vector
    double operator_norm = 0.0;  ///< ||A||_inf
    std::vector<Localization> loc;
};

Localization localization(const Mesh1D& mesh, std::span<const double> phi, double beta);

/// Throws EigenNonConvergence when inverse iteration stalls, InvalidConfig for eps <= 0.
SpectralPoint ground_state(const Mesh1D& mesh, double mu, double eps,
                           std::span<const double> betas = {});

enum class Regime { Subcritical, Critical, Supercritical };
const char* to_string(Regime r);
Regime classify(double mu);

struct PowerFit {
    bool valid = false;
    double c = 0.0;  ///< lambda0 ~ -c eps^{-p}
    double p = 0.0;
    std::size_t points = 0;
};

struct BlowupSweep {
    double mu = 0.0;
    Regime regime = Regime::Subcritical;
    std::vector<SpectralPoint> points;
    bool lambda_decreasing = true;  ///< strictly, along the decreasing eps list
    /// per beta: loc_h1 decreasing over the points with eps < beta/4
    std::vector<bool> loc_decreasing;
    PowerFit fit;
};

/// Requires h <= eps/10 for every eps (UnderResolved otherwise) and a strictly
/// decreasing eps list (InvalidConfig). Points are computed in parallel.
BlowupSweep blowup_sweep(const Mesh1D& mesh, double mu, std::span<const double> eps_list,
                         std::span<const double> betas);

/// Log-log least squares of -lambda0 against eps over points with lambda0 < 0.
PowerFit fit_power_law(std::span<const SpectralPoint> points);

/// Rows mu,eps,n,beta,lambda0,loc_l2,loc_h1 (one row per point and beta).
void write_blowup_csv(std::ostream& os, const BlowupSweep& sweep);
std::string fit_json(const BlowupSweep& sweep);

}  // namespace singheat
