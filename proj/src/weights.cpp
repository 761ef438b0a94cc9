#include "singheat/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "singheat/errors.hpp"
#include "singheat/io.hpp"
#include "singheat/parallel.hpp"

namespace singheat {

namespace {

constexpr std::array<double, 10> kSmooth9{0, 0, 0, 0, 0, 126, -420, 540, -315, 70};
constexpr std::array<double, 6> kSmooth5{0, 0, 0, 10, -15, 6};

template <std::size_t N>
double poly_derivative(const std::array<double, N>& c, double t, int k) {
    double acc = 0.0;
    for (std::size_t i = N; i-- > static_cast<std::size_t>(k);) {
        double coef = c[i];
        for (int j = 0; j < k; ++j) coef *= static_cast<double>(i - static_cast<std::size_t>(j));
        acc = acc * t + coef;
    }
    return acc;
}

template <std::size_t N>
double clamped_step(const std::array<double, N>& c, double t, int k) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return k == 0 ? 1.0 : 0.0;
    return poly_derivative(c, t, k);
}

double cell_sign(double x) { return x <= 0.5 ? 1.0 : -1.0; }

double dist(double x) { return std::min(x, 1.0 - x); }

bool in_closed(double x, Interval iv) { return x >= iv.lo - 1e-12 && x <= iv.hi + 1e-12; }
bool in_open(double x, Interval iv) { return x > iv.lo && x < iv.hi; }

SupNorms sup_norms(const Psi1& psi1, double varpi, const Mesh1D& mesh) {
    SupNorms s;
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    auto visit = [&](double x) {
        m0 = std::max(m0, std::abs(psi1(x, 0)));
        m1 = std::max(m1, std::abs(psi1(x, 1)));
        m2 = std::max(m2, std::abs(psi1(x, 2)));
    };
    // Polynomial pieces are sampled densely inside omega0; outside psi1 is affine.
    const Interval w0 = psi1.omega0();
    constexpr int kDense = 20000;
    for (int i = 0; i <= kDense; ++i) visit(w0.lo + (w0.hi - w0.lo) * i / kDense);
    visit(0.0);
    visit(1.0);
    for (double x : mesh.nodes) visit(x);
    s.psi = varpi * (m0 + 1.0);
    s.dpsi = varpi * m1;
    s.d2psi = varpi * m2;
    s.d2psi1 = m2;
    return s;
}

RuleEntry rule(std::string list, std::string name, double bound, double actual, bool upper,
               std::string note = {}) {
    RuleEntry e;
    e.list = std::move(list);
    e.name = std::move(name);
    e.bound = bound;
    e.actual = actual;
    // r0 entries are upper bounds on r0, varpi entries lower bounds on varpi
    const bool ok = upper ? actual <= bound : actual >= bound;
    e.status = ok ? RuleStatus::Pass : RuleStatus::Fail;
    e.note = std::move(note);
    return e;
}

RuleEntry deferred(std::string list, std::string name, double actual, std::string note) {
    RuleEntry e;
    e.list = std::move(list);
    e.name = std::move(name);
    e.bound = std::numeric_limits<double>::quiet_NaN();
    e.actual = actual;
    e.status = RuleStatus::Deferred;
    e.note = std::move(note);
    return e;
}

}  // namespace

double smoothstep9(double t, int k) { return clamped_step(kSmooth9, t, k); }
double smoothstep5(double t, int k) { return clamped_step(kSmooth5, t, k); }

Psi1::Psi1(Interval omega0) : omega0_(omega0), w_(omega0.hi - omega0.lo) {
    if (!(w_ > 0.0)) throw Error(ErrorKind::RegionNesting, "omega0 must be a nonempty interval");
}

double Psi1::operator()(double x, int k) const {
    const double t = (x - omega0_.lo) / w_;
    const double lin = 1.0 - 2.0 * x;
    double v = smoothstep9(t, k) * std::pow(w_, -k) * lin;
    if (k >= 1) v -= 2.0 * k * smoothstep9(t, k - 1) * std::pow(w_, -(k - 1));
    if (k == 0) v += x;
    if (k == 1) v += 1.0;
    return v;
}

const char* to_string(RuleStatus s) {
    switch (s) {
    case RuleStatus::Pass: return "pass";
    case RuleStatus::Fail: return "fail";
    case RuleStatus::Deferred: return "deferred";
    }
    return "deferred";
}

WeightPoint weight_point(const WeightParams& prm, const Psi1& psi1, double x) {
    WeightPoint w;
    w.delta = dist(x);
    w.s = cell_sign(x);
    const double varpi = prm.varpi;
    w.psi = varpi * (psi1(x, 0) + 1.0);
    w.p = varpi * psi1(x, 1);
    w.q = varpi * psi1(x, 2);
    w.alpha = smoothstep5((w.delta - prm.r0 / 2.0) / (prm.r0 / 2.0));
    const long double lam = prm.lambda;
    const long double d = w.delta;
    w.log_E = lam * std::log(d / static_cast<long double>(prm.r0)) + lam * w.psi;
    const long double E = std::exp(w.log_E);
    w.tau = d * d * w.psi + E;
    w.dtau = 2.0L * d * w.s * w.psi + d * d * w.p + lam * E * (w.s / d + w.p);
    return w;
}

WeightFields build_weights(const Mesh1D& mesh, const WeightParams& params) {
    if (!(params.lambda > 1.0)) throw Error(ErrorKind::InvalidConfig, "lambda must be > 1");
    if (!(params.gamma > 1.0 && params.gamma < 2.0)) {
        throw Error(ErrorKind::InvalidConfig, "gamma must lie in (1, 2)");
    }
    if (!(params.theta_power > 0.0)) throw Error(ErrorKind::InvalidConfig, "theta power must be positive");
    build_regions(mesh, params.omega, params.omega0, params.r0);  // geometry checks
    if (params.varpi0_target > 1.0) {
        throw Error(ErrorKind::InfeasibleSlope,
                    "varpi0 target " + io::fmt(params.varpi0_target) +
                        " is infeasible: psi1 = delta on the boundary layer fixes |psi1'| = 1 there; "
                        "maximal feasible varpi0 = 1");
    }

    WeightFields f;
    f.params = params;
    const Psi1 psi1(params.omega0);
    const std::size_t n = mesh.n;
    f.psi1.resize(n);
    f.dpsi1.resize(n);
    f.d2psi1.resize(n);
    f.varpi0 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = mesh.nodes[i];
        f.psi1[i] = psi1(x, 0);
        f.dpsi1[i] = psi1(x, 1);
        f.d2psi1[i] = psi1(x, 2);
        if (!in_closed(x, params.omega0)) f.varpi0 = std::min(f.varpi0, std::abs(f.dpsi1[i]));
    }
    // sup of |psi1' delta' - psi1| over [0, 1]: affine off omega0, so the
    // endpoints and a dense pass over omega0 suffice; independent of the mesh.
    {
        auto visit = [&](double x) {
            f.D_psi1 = std::max(f.D_psi1, std::abs(psi1(x, 1) * cell_sign(x) - psi1(x, 0)));
        };
        visit(0.0);
        visit(1.0);
        const Interval w0 = params.omega0;
        constexpr int kDense = 20000;
        for (int i = 0; i <= kDense; ++i) visit(w0.lo + (w0.hi - w0.lo) * i / kDense);
    }

    const double r0 = params.r0;
    const double v0 = f.varpi0;
    const double D = f.D_psi1;
    const double Rd = params.domain_diameter;
    const SupNorms unit = sup_norms(psi1, 1.0, mesh);

    // varpi list. The entry containing |D^2 psi| = varpi |psi1''| refers to
    // varpi itself and is solvable only when varpi0^2 > |psi1''|_inf.
    const double self_num = 1.0 + 2.0 * D / r0;
    const double self_den = v0 * v0 - unit.d2psi1;
    const double need_self = self_den > 0.0 ? self_num / self_den : std::numeric_limits<double>::infinity();
    const double e1 = 1.0;
    const double e3 = 2.0 / (v0 * v0) * (1.0 + 2.0 * D / r0);
    const double e4 = 4.0 * D / (v0 * v0);
    const double e5 = 24.0 * D * Rd / (v0 * v0);
    const double e6 = 2.0 / v0;
    double varpi = params.varpi;
    if (varpi == 0.0) {
        varpi = std::max({e1, e3, e4, e5, e6});
        if (std::isfinite(need_self)) varpi = std::max(varpi, need_self);
    }
    if (!(varpi >= 1.0)) throw Error(ErrorKind::InvalidConfig, "varpi must be >= 1");
    f.params.varpi = varpi;
    f.sup = sup_norms(psi1, varpi, mesh);
    const SupNorms& S = f.sup;

    auto& R = f.rules;
    R.push_back(rule("varpi", "1", e1, varpi, false));
    {
        RuleEntry e = rule("varpi", "(1 + 2 D/r0 + |D2psi|)/varpi0^2",
                           (self_num + S.d2psi) / (v0 * v0), varpi, false,
                           self_den > 0.0 ? "" : "self-referential: needs varpi0^2 > |psi1''|_inf = " +
                                                     io::fmt(unit.d2psi1));
        R.push_back(e);
    }
    R.push_back(rule("varpi", "2 (1 + 2 D/r0)/varpi0^2", e3, varpi, false));
    R.push_back(rule("varpi", "4 D/varpi0^2", e4, varpi, false));
    R.push_back(rule("varpi", "24 D R_Omega/varpi0^2", e5, varpi, false));
    R.push_back(rule("varpi", "2/varpi0", e6, varpi, false));

    R.push_back(rule("r0", "1", 1.0, r0, true));
    R.push_back(rule("r0", "2|psi|/(4|Dpsi| + |D2psi|)", 2.0 * S.psi / (4.0 * S.dpsi + S.d2psi), r0, true));
    R.push_back(rule("r0", "1/(R_Omega sqrt(4|Dpsi|^2 + 2|D2psi|))",
                     1.0 / (Rd * std::sqrt(4.0 * S.dpsi * S.dpsi + 2.0 * S.d2psi)), r0, true));
    R.push_back(rule("r0", "|psi|/(2 (2 - gamma) |Dpsi|)", S.psi / (2.0 * (2.0 - params.gamma) * S.dpsi), r0,
                     true));
    R.push_back(deferred("r0", "(M2/(4|mu| |Dpsi|))^(1/(gamma - 1))", r0,
                         "M2 is introduced only inside the proof and is not computable here"));
    R.push_back(rule("r0", "1/sqrt(8 D |Dpsi|/varpi0 + 3|D2psi|)",
                     1.0 / std::sqrt(8.0 * D * S.dpsi / v0 + 3.0 * S.d2psi), r0, true));
    R.push_back(rule("r0", "2|psi|/(|Dpsi|^2 + (1 + 2|psi|) |Dpsi|)",
                     2.0 * S.psi / (S.dpsi * S.dpsi + (1.0 + 2.0 * S.psi) * S.dpsi), r0, true));
    R.push_back(rule("r0", "1/(|Dpsi|^2 + 2|Dpsi|)", 1.0 / (S.dpsi * S.dpsi + 2.0 * S.dpsi), r0, true));
    R.push_back(rule("r0", "3|psi|^2/(4|Dpsi|)", 3.0 * S.psi * S.psi / (4.0 * S.dpsi), r0, true));
    R.push_back(deferred("r0", "1/(|Dpsi| sqrt(D3 |psi|^2 + D4))", r0,
                         "D3, D4 come from the T2 estimate; T2 vanishes identically in one dimension, "
                         "so the measured values are 0 and the entry is unbounded"));

    f.psi.resize(n);
    f.log_phi.resize(n);
    f.tau.resize(n);
    f.dtau.resize(n);
    f.alpha.resize(n);
    long double max_tau = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = weight_point(f.params, psi1, mesh.nodes[i]);
        f.psi[i] = w.psi;
        f.log_phi[i] = params.lambda * w.psi;
        f.tau[i] = w.tau;
        f.dtau[i] = w.dtau;
        f.alpha[i] = w.alpha;
        max_tau = std::max(max_tau, w.tau);
    }
    f.C_lambda = 2.0L * max_tau;

    R.push_back(deferred("condition", "varpi varpi0 > 2 C_Omega", varpi * v0,
                         "C_Omega is defined in external work, not computable here"));
    {
        RuleEntry e = rule("condition", "C_lambda > max tau", 0.0, 1.0, false,
                           "C_lambda = 2 max tau over nodes, so sigma >= theta max tau > 0");
        e.status = std::isfinite(static_cast<double>(std::log(f.C_lambda))) && f.C_lambda > max_tau
                       ? RuleStatus::Pass
                       : RuleStatus::Fail;
        R.push_back(e);
    }
    {
        RuleEntry e = rule("condition", "psi = 1 on the boundary", 1.0, varpi, false,
                           "psi = varpi (psi1 + 1) equals varpi on the boundary; the construction "
                           "follows that definition");
        e.status = varpi == 1.0 ? RuleStatus::Pass : RuleStatus::Fail;
        R.push_back(e);
    }
    return f;
}

ThetaValues theta_at(double t, double T, double power) {
    if (!(t > 0.0 && t < T)) throw Error(ErrorKind::SingularTime, "theta is singular at t = 0 and t = T");
    const double u = t * (T - t);
    const double du = T - 2.0 * t;
    const double d2u = -2.0;
    const double k = power;
    ThetaValues v;
    v.theta = std::pow(u, -k);
    v.dtheta = -k * std::pow(u, -k - 1.0) * du;
    v.d2theta = k * (k + 1.0) * std::pow(u, -k - 2.0) * du * du - k * std::pow(u, -k - 1.0) * d2u;
    return v;
}

WeightSlice eval_weights(const Mesh1D& mesh, const WeightFields& f, double t) {
    WeightSlice s;
    s.theta = theta_at(t, f.params.T, f.params.theta_power);
    const long double th = s.theta.theta;
    s.sigma.resize(mesh.n);
    s.dsigma.resize(mesh.n);
    for (std::size_t i = 0; i < mesh.n; ++i) {
        s.sigma[i] = th * (f.C_lambda - f.tau[i]);
        s.dsigma[i] = -th * f.dtau[i];
    }
    return s;
}

FluxReport check_boundary_flux(const Mesh1D& mesh, const WeightFields& f) {
    FluxReport r;
    r.log_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.n; ++i) {
        const double d = mesh.delta[i];
        if (!(d < f.params.r0 / 2.0)) continue;
        const long double ratio = std::abs(f.dtau[i]) / static_cast<long double>(d);
        const double lr = static_cast<double>(std::log(ratio));
        r.log_max = std::max(r.log_max, lr);
        ++r.nodes;
        if (i == 0) r.log_first_node = lr;
    }
    // The supremum over the closed layer sits at its edge for lambda >= 2;
    // including the edge point keeps it independent of where the last node falls.
    const Psi1 psi1(f.params.omega0);
    for (double x : {f.params.r0 / 2.0, 1.0 - f.params.r0 / 2.0}) {
        const auto w = weight_point(f.params, psi1, x);
        r.log_max = std::max(r.log_max, static_cast<double>(std::log(std::abs(w.dtau) / w.delta)));
    }
    return r;
}

bool PropositionReport::all_passed() const {
    return std::all_of(results.begin(), results.end(),
                       [](const PropositionResult& p) { return !p.asserted || p.passed; });
}

namespace {

struct IneqSpec {
    const char* id;
    const char* region;
    const char* statement;
};

constexpr std::array<IneqSpec, 8> kIneqs{{
    {"delta_hessian", "boundary_layer", "D2 tau_delta >= 0 (equals Laplacian in 1-D)"},
    {"phi_hessian", "boundary_layer", "D2 tau_phi >= (lambda/2) (delta/r0)^(lambda-2) phi"},
    {"phi_laplacian", "O", "Laplacian tau_phi >= lambda^2 (delta/r0)^lambda phi"},
    {"T1_lower", "boundary_layer", "T1 >= |grad tau|^2"},
    {"T2_nonneg", "O_tilde", "T2 >= 0"},
    {"T3_lower", "outside_omega0", "T3 >= lambda^2 (phi delta^(lambda-2)/r0^lambda + (delta/r0)^lambda phi) |grad tau|^2"},
    {"grad_tau_layer", "boundary_layer", "|grad tau|^2 >= delta^2"},
    {"grad_tau_interior", "O", "|grad tau|^2 >= lambda^2 (delta/r0)^(2 lambda) phi^2"},
}};

constexpr std::array<const char*, 9> kConstants{"C1", "C2", "C3", "D1", "D2", "D3_D4", "D5", "D6", "T2_min"};

struct Accum {
    std::array<double, kIneqs.size()> min_slack;
    std::array<double, kIneqs.size()> witness;
    std::array<std::size_t, kIneqs.size()> count{};
    std::array<double, kConstants.size()> consts;
    std::vector<SamplerFailure> failures;

    Accum() {
        min_slack.fill(std::numeric_limits<double>::infinity());
        witness.fill(0.0);
        consts.fill(-std::numeric_limits<double>::infinity());
        consts[8] = std::numeric_limits<double>::infinity();
    }

    void record(std::size_t k, double x, long double value, long double scale) {
        const double rel = static_cast<double>(value / std::max(scale, 1e-300L));
        ++count[k];
        if (rel < min_slack[k]) {
            min_slack[k] = rel;
            witness[k] = x;
        }
        if (rel < -1e-12 && failures.size() < 1000) {
            failures.push_back({x, kIneqs[k].region, kIneqs[k].id, rel});
        }
    }
    void bump(std::size_t c, double v) { consts[c] = std::max(consts[c], v); }
};

void sample_point(const WeightParams& prm, const Psi1& psi1, double x, Accum& acc) {
    const auto w = weight_point(prm, psi1, x);
    const long double lam = prm.lambda;
    const long double d = w.delta;
    const long double s = w.s, p = w.p, q = w.q, a = w.alpha, psi = w.psi;
    const long double r0 = prm.r0;
    const bool layer = w.delta < prm.r0;
    const bool tilde = w.delta > prm.r0;
    const bool in_w0 = in_closed(x, prm.omega0);
    const bool o_set = tilde && !in_w0;
    const long double E = std::exp(w.log_E);

    // tau_delta'' = 2 psi + 4 delta s p + delta^2 q
    const long double t1 = 2.0L * psi, t2 = 4.0L * d * s * p, t3 = d * d * q;
    const long double tdd = t1 + t2 + t3;
    const long double tdd_scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
    acc.bump(0, static_cast<double>(std::abs(tdd)));
    if (layer) acc.bump(1, static_cast<double>(std::abs(tdd)));

    // D2 tau_phi divided by (phi/r0^lambda) delta^(lambda-2)
    const long double h1 = lam * (lam - 1.0L), h2 = 2.0L * lam * lam * d * s * p, h3 = lam * d * d * q,
                      h4 = lam * lam * d * d * p * p;
    const long double hess = h1 + h2 + h3 + h4;
    acc.bump(2, static_cast<double>(-hess / (lam * r0 * r0)));

    // T3 bracket divided by (phi/r0^lambda) delta^(lambda-2) |grad tau|^2
    const long double b1 = (2.0L - a) * (lam * lam - lam), b2 = 2.0L * lam * lam * (2.0L - a) * d * s * p,
                      b3 = lam * lam * (2.0L - a) * d * d * p * p, b4 = -lam * a * d * d * q,
                      b5 = 2.0L * lam * d * d * q;
    const long double t3b = b1 + b2 + b3 + b4 + b5;
    acc.bump(6, static_cast<double>(t3b / (lam * lam)));

    // T1 / |grad tau|^2 = (2 - alpha) tau_delta''
    const long double t1g = (2.0L - a) * tdd;
    if (o_set) acc.bump(3, static_cast<double>(-t1g));
    if (in_open(x, prm.omega0)) acc.bump(4, static_cast<double>(std::abs(t1g)));

    // tau' / E, computed without forming E when it is huge
    const long double lower = 2.0L * d * s * psi + d * d * p;
    const long double upper = lam * (s / d + p);
    const long double dtau_over_E = lower * std::exp(-w.log_E) + upper;
    if (in_open(x, prm.omega0)) acc.bump(7, static_cast<double>(dtau_over_E * dtau_over_E / (lam * lam)));

    // T2 carries the factor |psi'|^2 - (delta' psi')^2, zero in one dimension
    const long double F = p * p - (s * p) * (s * p);
    long double T2 = 0.0L;
    if (F != 0.0L) {
        const long double Ed = E;
        const long double phi_r = std::exp(lam * psi - lam * std::log(r0));
        T2 = 4.0L * F * (d * d + lam * Ed) * (5.0L * d * d * psi + lam * (2.0L - psi) * Ed) +
             phi_r * F *
                 (2.0L * lam * lam * lam * std::pow(d, 3.0L * lam - 2.0L) * phi_r * phi_r +
                  lam * lam * (8.0L * psi * (1.0L - psi) - 2.0L) * std::pow(d, lam + 2.0L) +
                  4.0L * lam * lam * phi_r * std::pow(d, 2.0L * lam) + 2.0L * lam * std::pow(d, lam + 2.0L));
    }
    if (layer) {
        acc.consts[5] = std::max(acc.consts[5], 0.0);
        acc.consts[8] = std::min(acc.consts[8], static_cast<double>(T2));
    }

    if (layer) {
        acc.record(0, x, tdd, tdd_scale);
        const long double rhs = lam / 2.0L * r0 * r0;
        acc.record(1, x, hess - rhs, std::abs(h1) + std::abs(h2) + std::abs(h3) + std::abs(h4) + rhs);
        acc.record(3, x, t1g - 1.0L, (2.0L - a) * tdd_scale + 1.0L);
        // |tau'| >= delta, tested as |tau'|/delta - 1
        const long double g = std::abs(w.dtau) / d;
        acc.record(6, x, g - 1.0L, g + 1.0L);
    }
    if (o_set) {
        const long double l1 = lam * (lam - 1.0L) / (d * d), l2 = 2.0L * lam * lam * s * p / d, l3 = lam * q,
                          l4 = lam * lam * p * p;
        const long double lap = l1 + l2 + l3 + l4;
        acc.record(2, x, lap - lam * lam,
                   std::abs(l1) + std::abs(l2) + std::abs(l3) + std::abs(l4) + lam * lam);
        const long double g = std::abs(dtau_over_E);
        acc.record(7, x, g - lam, g + lam);
    }
    if (tilde) acc.record(4, x, T2, std::abs(T2) + 1.0L);
    if (!in_w0) {
        const long double rhs = lam * lam * (1.0L + d * d);
        acc.record(5, x, t3b - rhs,
                   std::abs(b1) + std::abs(b2) + std::abs(b3) + std::abs(b4) + std::abs(b5) + rhs);
    }
}

}  // namespace

PropositionReport sample_propositions(const Mesh1D& mesh, const WeightFields& f, std::size_t sample_count) {
    if (sample_count == 0) throw Error(ErrorKind::InvalidConfig, "sample count must be positive");
    const Psi1 psi1(f.params.omega0);
    constexpr std::size_t kChunk = 4096;
    const std::size_t chunks = (sample_count + kChunk - 1) / kChunk;
    std::vector<Accum> parts(chunks);
    const double band = 4.0 * mesh.h;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t end = std::min(sample_count, (c + 1) * kChunk);
        for (std::size_t j = c * kChunk; j < end; ++j) {
            const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(sample_count);
            if (std::abs(x - 0.5) < band) continue;
            sample_point(f.params, psi1, x, parts[c]);
        }
    });
    Accum total;
    for (const auto& a : parts) {
        for (std::size_t k = 0; k < kIneqs.size(); ++k) {
            total.count[k] += a.count[k];
            if (a.min_slack[k] < total.min_slack[k]) {
                total.min_slack[k] = a.min_slack[k];
                total.witness[k] = a.witness[k];
            }
        }
        for (std::size_t c = 0; c + 1 < kConstants.size(); ++c) total.consts[c] = std::max(total.consts[c], a.consts[c]);
        total.consts[8] = std::min(total.consts[8], a.consts[8]);
        for (const auto& fl : a.failures) {
            if (total.failures.size() < 1000) total.failures.push_back(fl);
        }
    }

    PropositionReport rep;
    rep.lambda = f.params.lambda;
    for (std::size_t k = 0; k < kIneqs.size(); ++k) {
        PropositionResult r;
        r.id = kIneqs[k].id;
        r.region = kIneqs[k].region;
        r.statement = kIneqs[k].statement;
        r.samples = total.count[k];
        r.min_slack = total.count[k] ? total.min_slack[k] : 0.0;
        r.witness_x = total.witness[k];
        r.passed = r.min_slack >= -1e-12;
        rep.results.push_back(r);
    }
    for (std::size_t c = 0; c < kConstants.size(); ++c) {
        double v = total.consts[c];
        if (!std::isfinite(v)) v = 0.0;
        rep.constants.emplace_back(kConstants[c], v);
    }
    rep.failures = std::move(total.failures);
    return rep;
}

LambdaSearch find_lambda0(const Mesh1D& mesh, const WeightParams& base, const std::vector<double>& grid,
                          std::size_t sample_count) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 1.0)) throw Error(ErrorKind::InvalidConfig, "lambda grid values must exceed 1");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorKind::InvalidConfig, "lambda grid must increase");
    }
    LambdaSearch out;
    for (double lam : grid) {
        WeightParams p = base;
        p.lambda = lam;
        const auto fields = build_weights(mesh, p);
        const bool ok = sample_propositions(mesh, fields, sample_count).all_passed();
        out.grid.emplace_back(lam, ok);
        if (ok && !out.found) {
            out.found = true;
            out.lambda0 = lam;
        } else if (!ok && out.found) {
            out.monotone = false;
        }
    }
    return out;
}

std::string weights_manifest_json(const WeightFields& f, const PropositionReport* props,
                                  const LambdaSearch* search, const FluxReport* flux) {
    nlohmann::ordered_json j;
    const auto& p = f.params;
    j["params"] = {{"lambda", p.lambda},     {"r0", p.r0},
                   {"varpi", p.varpi},       {"varpi0_target", p.varpi0_target},
                   {"gamma", p.gamma},       {"mu", p.mu},
                   {"T", p.T},               {"theta_power", p.theta_power},
                   {"R", p.R},               {"A1", p.A1},
                   {"omega", {p.omega.lo, p.omega.hi}},
                   {"omega0", {p.omega0.lo, p.omega0.hi}}};
    j["varpi0_achieved"] = f.varpi0;
    j["D_psi1"] = f.D_psi1;
    j["sup_norms"] = {{"psi", f.sup.psi}, {"dpsi", f.sup.dpsi}, {"d2psi", f.sup.d2psi}, {"d2psi1", f.sup.d2psi1}};
    j["log_C_lambda"] = static_cast<double>(std::log(f.C_lambda));
    auto rules = nlohmann::ordered_json::array();
    for (const auto& r : f.rules) {
        nlohmann::ordered_json e;
        e["list"] = r.list;
        e["entry"] = r.name;
        e["bound"] = std::isfinite(r.bound) ? nlohmann::ordered_json(r.bound) : nlohmann::ordered_json(nullptr);
        e["actual"] = r.actual;
        e["status"] = to_string(r.status);
        if (!r.note.empty()) e["note"] = r.note;
        rules.push_back(e);
    }
    j["rules"] = rules;
    if (props) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& r : props->results) {
            arr.push_back({{"id", r.id},
                           {"region", r.region},
                           {"statement", r.statement},
                           {"passed", r.passed},
                           {"samples", r.samples},
                           {"min_slack", r.min_slack},
                           {"witness_x", r.witness_x}});
        }
        j["propositions"] = arr;
        nlohmann::ordered_json c;
        for (const auto& [k, v] : props->constants) c[k] = v;
        j["measured_constants"] = c;
    }
    if (search) {
        j["lambda0_found"] = search->found;
        j["lambda0"] = search->found ? nlohmann::ordered_json(search->lambda0) : nlohmann::ordered_json(nullptr);
        auto g = nlohmann::ordered_json::array();
        for (const auto& [lam, ok] : search->grid) g.push_back({{"lambda", lam}, {"passed", ok}});
        j["lambda_grid"] = g;
        j["lambda_monotone"] = search->monotone;
    }
    if (flux) {
        j["flux"] = {{"log_first_node", flux->log_first_node}, {"log_max", flux->log_max}, {"nodes", flux->nodes}};
    }
    return j.dump(2) + "\n";
}

void write_sampler_failures_csv(std::ostream& os, const PropositionReport& r) {
    os << "x,region,inequality,slack\n";
    for (const auto& f : r.failures) {
        os << io::fmt(f.x) << ',' << f.region << ',' << f.id << ',' << io::fmt(f.slack) << '\n';
    }
}

}  // namespace singheat
