#include "singheat/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "singheat/errors.hpp"
#include "singheat/io.hpp"

namespace singheat {

double QuadForms::eval(const SymTridiag& a, std::span<const double> u) {
    double s = 0.0;
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
        s += a.diag[i] * u[i] * u[i];
        if (i + 1 < n) s += 2.0 * a.off[i] * u[i] * u[i + 1];
    }
    return s;
}

double QuadForms::eval(std::span<const double> d, std::span<const double> u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += d[i] * u[i] * u[i];
    return s;
}

namespace {

// Tridiagonal form sum_c w_c (u_{c} - u_{c-1})^2 over the n+1 cells, with
// u_0 = u_{n+1} = 0. Cell c joins node c-1 and node c (1-based nodes).
SymTridiag cell_form(std::span<const double> cell_weight) {
    const std::size_t n = cell_weight.size() - 1;
    SymTridiag a;
    a.diag.resize(n);
    a.off.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) a.diag[i] = cell_weight[i] + cell_weight[i + 1];
    for (std::size_t i = 0; i + 1 < n; ++i) a.off[i] = -cell_weight[i + 1];
    return a;
}

}  // namespace

QuadForms build_forms(const Mesh1D& mesh, double gamma) {
    if (!(gamma >= 0.0 && gamma < 2.0)) {
        throw Error(ErrorKind::InvalidConfig, "gamma must lie in [0, 2)");
    }
    QuadForms f;
    f.gamma = gamma;
    f.h = mesh.h;
    const std::size_t n = mesh.n;
    const double h = mesh.h;

    Vec unit(n + 1, 1.0 / h);
    f.stiffness = cell_form(unit);

    Vec weighted(n + 1);
    for (std::size_t c = 0; c <= n; ++c) {
        // midpoint distance counted in half cells keeps the weights mirror-exact
        const std::size_t twice_mid = 2 * c + 1;
        const std::size_t twice_mid_mirror = 2 * (n + 1) - twice_mid;
        const double dmid = 0.5 * h * static_cast<double>(std::min(twice_mid, twice_mid_mirror));
        weighted[c] = std::pow(dmid, 2.0 - gamma) / h;
    }
    f.weighted_stiffness = cell_form(weighted);

    f.inv_sq.resize(n);
    f.inv_gamma.resize(n);
    f.mass.assign(n, h);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = mesh.delta[i];
        f.inv_sq[i] = h / (d * d);
        f.inv_gamma[i] = h / std::pow(d, gamma);
    }
    return f;
}

PencilMin pencil_min(const SymTridiag& lhs, std::span<const double> rhs_diag) {
    const auto scaled = scale_by_diagonal(lhs, rhs_diag);
    return {eigenvalue_bisect(scaled, 0), scaled.norm_inf()};
}

SymTridiag hardy_form(const QuadForms& f, double mu, double inv_gamma_coef, double mass_coef) {
    SymTridiag a = f.stiffness;
    for (std::size_t i = 0; i < a.diag.size(); ++i) {
        a.diag[i] += -mu * f.inv_sq[i] - inv_gamma_coef * f.inv_gamma[i] + mass_coef * f.mass[i];
    }
    return a;
}

double rayleigh_hardy(const Mesh1D& mesh) {
    if (mesh.n < 10) throw Error(ErrorKind::InvalidMesh, "Hardy quotient needs n >= 10");
    const auto f = build_forms(mesh, 1.5);
    return pencil_min(f.stiffness, f.inv_sq).value;
}

double find_A2(const Mesh1D& mesh, double mu, double gamma, double A1) {
    const auto f = build_forms(mesh, gamma);
    return std::max(0.0, -pencil_min(hardy_form(f, mu, A1), f.mass).value);
}

double find_A3(const Mesh1D& mesh, double mu, double gamma) {
    const auto f = build_forms(mesh, gamma);
    // R_Omega = 1 on the unit interval, so its power drops out
    SymTridiag a = hardy_form(f, mu, 0.0);
    for (std::size_t i = 0; i < a.diag.size(); ++i) a.diag[i] -= f.weighted_stiffness.diag[i];
    for (std::size_t i = 0; i < a.off.size(); ++i) a.off[i] -= f.weighted_stiffness.off[i];
    return std::max(0.0, -pencil_min(a, f.mass).value);
}

namespace {

double A4_on_forms(const QuadForms& f, double mu, double A1, double A5) {
    SymTridiag a = hardy_form(f, mu, A5 * A1);
    for (std::size_t i = 0; i < a.diag.size(); ++i) a.diag[i] -= A5 * f.weighted_stiffness.diag[i];
    for (std::size_t i = 0; i < a.off.size(); ++i) a.off[i] -= A5 * f.weighted_stiffness.off[i];
    return std::max(0.0, -pencil_min(a, f.mass).value);
}

// Tolerance below which a constant is indistinguishable from zero on a mesh:
// the certification slack 1e-9 times the scaled stiffness norm 4/h^2.
double zero_floor_for(const Mesh1D& mesh) { return 1e-9 * 4.0 / (mesh.h * mesh.h); }

}  // namespace

double find_A4(const Mesh1D& mesh, double mu, double gamma, double A1, double A5) {
    return A4_on_forms(build_forms(mesh, gamma), mu, A1, A5);
}

bool refinement_stable(double coarse, double fine, double zero_floor) {
    if (!std::isfinite(coarse) || !std::isfinite(fine)) return false;
    if (coarse <= zero_floor && fine <= zero_floor) return true;
    const double ref = std::max(std::abs(coarse), std::abs(fine));
    return std::abs(fine - coarse) < 0.2 * ref;
}

A45Result find_A4_A5(const Mesh1D& mesh, double mu, double gamma, double A1, std::size_t grid_size) {
    const auto fine_mesh = build_mesh(2 * mesh.n);
    const auto fc = build_forms(mesh, gamma);
    const auto ff = build_forms(fine_mesh, gamma);
    const double floor = zero_floor_for(fine_mesh);
    A45Result out;
    double A5 = 1.0;
    for (std::size_t k = 0; k < grid_size; ++k, A5 *= 0.5) {
        A45Entry e;
        e.A5 = A5;
        e.A4_coarse = A4_on_forms(fc, mu, A1, A5);
        e.A4_fine = A4_on_forms(ff, mu, A1, A5);
        e.stable = refinement_stable(e.A4_coarse, e.A4_fine, floor);
        out.tried.push_back(e);
        if (e.stable) {
            out.feasible = true;
            out.A4 = e.A4_coarse;
            out.A5 = A5;
            break;
        }
    }
    return out;
}

double compute_A0_gamma(const Mesh1D& mesh, double gamma, double A1) {
    const auto f = build_forms(mesh, gamma);
    const SymTridiag base = hardy_form(f, kCriticalMu, A1);
    const auto pm = pencil_min(base, f.mass);
    const double tol = 1e-10 * pm.scale;
    auto admissible = [&](double A) {
        return pencil_min(hardy_form(f, kCriticalMu, A1, A), f.mass).value >= -tol;
    };
    if (admissible(0.0)) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t grow = 0;
    while (!admissible(hi)) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 200 || !std::isfinite(hi)) {
            std::ostringstream msg;
            msg << "no admissible upper bracket for A0 (last bracket [" << lo << ", " << hi << "])";
            throw Error(ErrorKind::BracketFailure, msg.str());
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (admissible(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

NormEquivalence check_norm_equivalence(const Mesh1D& mesh, double mu, double gamma, double A1,
                                       double A0, std::size_t sample_count, std::uint64_t seed) {
    const auto f = build_forms(mesh, gamma);
    const double mu_plus = std::max(0.0, mu);
    const double mu_minus = std::max(0.0, -mu);
    NormEquivalence out;
    out.lower_factor = 1.0 - mu_plus / kCriticalMu;
    out.upper_factor = 1.0 + mu_minus / kCriticalMu;
    out.min_lower_slack = std::numeric_limits<double>::infinity();
    out.min_upper_slack = std::numeric_limits<double>::infinity();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Vec u(mesh.n);
    for (std::size_t s = 0; s < sample_count; ++s) {
        if (s % 2 == 0) {
            for (auto& v : u) v = gauss(rng);
        } else {
            std::fill(u.begin(), u.end(), 0.0);
            for (int k = 1; k <= 8; ++k) {
                const double c = gauss(rng) / k;
                for (std::size_t i = 0; i < mesh.n; ++i) {
                    u[i] += c * std::sin(k * std::numbers::pi * mesh.nodes[i]);
                }
            }
        }
        const double kin = QuadForms::eval(f.stiffness, u);
        const double w2 = QuadForms::eval(f.inv_sq, u);
        const double wg = QuadForms::eval(f.inv_gamma, u);
        const double m = QuadForms::eval(f.mass, u);
        const double phi = kin - mu * w2 + A0 * m;
        const double left = out.lower_factor * (kin + A0 * m) + mu_plus / kCriticalMu * A1 * wg;
        const double right = out.upper_factor * (kin + A0 * m);
        const double lower = (phi - left) / std::abs(phi);
        const double upper = (right - phi) / std::abs(phi);
        out.min_lower_slack = std::min(out.min_lower_slack, lower);
        out.min_upper_slack = std::min(out.min_upper_slack, upper);
        if ((lower < -1e-9 || upper < -1e-9) && !out.witness) {
            out.passed = false;
            out.witness = s;
        }
        ++out.samples;
    }
    return out;
}

A1Sweep operative_A1(double mu, double gamma, std::span<const std::size_t> mesh_sizes, int kmax,
                     int kmin) {
    A1Sweep out;
    std::vector<Mesh1D> meshes;
    for (auto n : mesh_sizes) meshes.push_back(build_mesh(n));
    for (int k = kmax; k >= kmin; --k) {
        const double A1 = std::ldexp(1.0, k);
        std::vector<double> values;
        for (const auto& m : meshes) values.push_back(find_A2(m, mu, gamma, A1));
        bool stable = true;
        for (std::size_t j = 0; j + 1 < values.size(); ++j) {
            stable = stable && refinement_stable(values[j], values[j + 1], zero_floor_for(meshes[j + 1]));
        }
        out.table.emplace_back(A1, values);
        if (stable) {
            out.A1 = A1;
            out.found = true;
            break;
        }
    }
    return out;
}

void write_hardy_csv_header(std::ostream& os) {
    os << "mu,gamma,n,rayleigh_min,A1,A2,A3,A4,A5,A0\n";
}

void write_hardy_csv_row(std::ostream& os, const HardyReport& r) {
    using io::fmt;
    os << fmt(r.mu) << ',' << fmt(r.gamma) << ',' << r.mesh_n << ',' << fmt(r.rayleigh_min) << ','
       << fmt(r.A1) << ',' << fmt(r.A2) << ',' << fmt(r.A3) << ',' << fmt(r.A4) << ','
       << fmt(r.A5) << ',' << fmt(r.A0_gamma) << '\n';
}

}  // namespace singheat
