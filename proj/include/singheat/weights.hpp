#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "singheat/mesh.hpp"

namespace singheat {

/// Degree-9 smoothstep: S(0) = 0, S(1) = 1, derivatives 1..4 vanish at both
/// ends. Returns the k-th derivative (k <= 9) at t, clamped outside [0, 1].
double smoothstep9(double t, int k = 0);
/// Quintic smoothstep (C2 joins), used for the cutoff alpha.
double smoothstep5(double t, int k = 0);

/// Interior profile psi1: equal to x left of omega0, to 1 - x right of it, and
/// x + S((x - a0)/w)(1 - 2x) across omega0 = (a0, b0), w = b0 - a0. It equals
/// delta on both boundary layers, has |psi1'| = 1 off omega0 and is C4.
class Psi1 {
public:
    explicit Psi1(Interval omega0);
    /// k-th derivative, k in 0..4
    double operator()(double x, int k = 0) const;
    Interval omega0() const { return omega0_; }

private:
    Interval omega0_;
    double w_;
};

struct WeightParams {
    double lambda = 2.0;
    double r0 = 0.1;
    double varpi = 0.0;  ///< 0: derived from the admissibility list
    double varpi0_target = 1.0;
    double gamma = 1.5;
    double mu = 0.25;  ///< only enters the deferred M2 entry
    double T = 0.5;
    double theta_power = 3.0;  ///< k in theta = (t (T - t))^{-k}
    double R = 1.0;            ///< Carleman amplitude
    double A1 = 1.0;           ///< Hardy remainder coefficient on the left side
    double domain_diameter = 1.0;
    Interval omega{0.3, 0.7};
    Interval omega0{0.4, 0.6};
};

struct SupNorms {
    double psi = 0.0;    ///< |psi|_inf
    double dpsi = 0.0;   ///< |D psi|_inf
    double d2psi = 0.0;  ///< |D^2 psi|_inf
    double d2psi1 = 0.0; ///< |psi1''|_inf
};

enum class RuleStatus { Pass, Fail, Deferred };
const char* to_string(RuleStatus s);

struct RuleEntry {
    std::string list;  ///< "r0", "varpi" or "condition"
    std::string name;
    double bound = 0.0;     ///< value of the list entry
    double actual = 0.0;    ///< r0 or varpi being tested
    RuleStatus status = RuleStatus::Deferred;
    std::string note;
};

/// Node fields of the weight family at fixed lambda. Exponential quantities are
/// kept in long double or as logarithms: e^{lambda psi} overflows double early.
struct WeightFields {
    WeightParams params;  ///< with varpi resolved
    double varpi0 = 0.0;  ///< achieved min |psi1'| off omega0
    double D_psi1 = 0.0;  ///< sup over [0, 1] of |psi1' delta' - psi1|
    SupNorms sup;
    long double C_lambda = 0.0L;  ///< 2 max tau over nodes
    Vec psi1, dpsi1, d2psi1;
    Vec psi;
    Vec log_phi;  ///< lambda psi
    std::vector<long double> tau;
    std::vector<long double> dtau;  ///< tau'
    Vec alpha;
    std::vector<RuleEntry> rules;
};

/// Throws InfeasibleSlope when varpi0_target exceeds the achievable value 1
/// (psi1 = delta on the boundary layer pins |psi1'| = 1 there), R0Overlap or
/// RegionNesting for bad geometry, InvalidConfig for lambda <= 1 or gamma outside (1, 2).
WeightFields build_weights(const Mesh1D& mesh, const WeightParams& params);

/// Pointwise weight quantities at any x in (0, 1), with analytic derivatives.
struct WeightPoint {
    double delta = 0.0;
    double s = 1.0;  ///< delta'
    double psi = 0.0, p = 0.0, q = 0.0;  ///< psi, psi', psi''
    double alpha = 0.0;
    long double log_E = 0.0L;  ///< log((delta/r0)^lambda phi)
    long double tau = 0.0L;
    long double dtau = 0.0L;  ///< tau'
};
WeightPoint weight_point(const WeightParams& params, const Psi1& psi1, double x);

struct ThetaValues {
    double theta = 0.0, dtheta = 0.0, d2theta = 0.0;
};
/// Throws SingularTime unless 0 < t < T.
ThetaValues theta_at(double t, double T, double power);

struct WeightSlice {
    ThetaValues theta;
    std::vector<long double> sigma;   ///< theta (C_lambda - tau)
    std::vector<long double> dsigma;  ///< -theta tau'
};
WeightSlice eval_weights(const Mesh1D& mesh, const WeightFields& f, double t);

/// |d_x sigma| / (theta delta) = |tau'| / delta near the boundary, as logs.
struct FluxReport {
    double log_first_node = 0.0;  ///< at the node nearest the boundary
    double log_max = 0.0;         ///< max over nodes with delta < r0/2 and the edge delta = r0/2
    std::size_t nodes = 0;
};
FluxReport check_boundary_flux(const Mesh1D& mesh, const WeightFields& f);

struct PropositionResult {
    std::string id;
    std::string region;
    std::string statement;
    bool asserted = true;
    bool passed = true;
    std::size_t samples = 0;
    double min_slack = 0.0;  ///< in the scaled form, normalized by the term scale
    double witness_x = 0.0;
};

struct SamplerFailure {
    double x = 0.0;
    std::string region;
    std::string id;
    double slack = 0.0;
};

struct PropositionReport {
    double lambda = 0.0;
    std::vector<PropositionResult> results;
    std::vector<std::pair<std::string, double>> constants;  ///< measured C1..C3, D1..D6
    std::vector<SamplerFailure> failures;  ///< capped at 1000 rows
    bool all_passed() const;
};

/// Evaluates every pointwise inequality at sample_count midpoints of (0, 1),
/// skipping a 4h band around x = 1/2 where delta has its kink.
PropositionReport sample_propositions(const Mesh1D& mesh, const WeightFields& f, std::size_t sample_count);

struct LambdaSearch {
    bool found = false;
    double lambda0 = 0.0;
    std::vector<std::pair<double, bool>> grid;  ///< every grid value and its outcome
    bool monotone = true;  ///< no failure after the first pass
};
LambdaSearch find_lambda0(const Mesh1D& mesh, const WeightParams& base, const std::vector<double>& grid,
                          std::size_t sample_count);

std::string weights_manifest_json(const WeightFields& f, const PropositionReport* props,
                                  const LambdaSearch* search, const FluxReport* flux);
void write_sampler_failures_csv(std::ostream& os, const PropositionReport& r);

}  // namespace singheat
