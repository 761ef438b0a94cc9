#include "singheat/hum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "singheat/cg.hpp"
#include "singheat/errors.hpp"
#include "singheat/io.hpp"

namespace singheat {

namespace {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void validate(const HumProblem& p) {
    const std::size_t n = p.mesh.n;
    if (p.op.size() != n) throw Error(ErrorKind::Dimension, "operator size does not match mesh");
    if (p.u0.size() != n) throw Error(ErrorKind::Dimension, "initial datum length mismatch");
    if (!p.mask.empty() && p.mask.size() != n) throw Error(ErrorKind::Dimension, "mask length mismatch");
    if (!(p.penalty >= 0.0)) throw Error(ErrorKind::InvalidConfig, "penalty must be >= 0");
    for (double v : p.u0) {
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidConfig, "initial datum must be finite");
    }
}

}  // namespace

HumSolver::HumSolver(HumProblem p) : p_((validate(p), std::move(p))), stepper_(p_.op, p_.tg) {}

std::vector<Vec> HumSolver::control_from(std::span<const double> vT) const {
    auto g = stepper_.source_pairing(stepper_.adjoint(vT));
    if (!p_.mask.empty()) {
        for (auto& gk : g) {
            for (std::size_t i = 0; i < gk.size(); ++i) {
                if (!p_.mask[i]) gk[i] = 0.0;
            }
        }
    }
    return g;
}

Vec HumSolver::gramian_apply(std::span<const double> vT) const {
    const Vec zero(p_.mesh.n, 0.0);
    return stepper_.forward_final(zero, control_from(vT));
}

double HumSolver::gramian_energy(std::span<const double> vT) const {
    double s = 0.0;
    for (const auto& f : control_from(vT)) s += p_.tg.dt * p_.mesh.h * dot(f, f);
    return s;
}

Vec HumSolver::free_final(std::span<const double> u0) const { return stepper_.forward_final(u0, {}); }

Vec HumSolver::adjoint_initial(std::span<const double> vT) const { return stepper_.adjoint(vT).front(); }

HumResult HumSolver::solve() const {
    const std::size_t n = p_.mesh.n;
    const double pen = p_.penalty;
    HumResult r;
    const Vec ufree = free_final(p_.u0);
    r.free_final_norm = l2_norm(p_.mesh, ufree);
    Vec b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = -ufree[i];
    auto shifted = [&](const Vec& x) {
        Vec y = gramian_apply(x);
        for (std::size_t i = 0; i < n; ++i) y[i] += pen * x[i];
        return y;
    };
    r.vT_star.assign(n, 0.0);
    const auto st = conjugate_gradient(shifted, b, r.vT_star, p_.cg_tol, p_.cg_max_iter, dot);
    r.cg_iters = st.iterations;
    r.converged = st.converged;
    r.gram_min_eig_est = std::isfinite(st.min_rayleigh) ? st.min_rayleigh - pen : 0.0;

    r.control = control_from(r.vT_star);
    r.final_state = stepper_.forward_final(p_.u0, r.control);
    r.final_norm = l2_norm(p_.mesh, r.final_state);
    for (const auto& f : r.control) r.control_cost += p_.tg.dt * p_.mesh.h * dot(f, f);

    Vec res = gramian_apply(r.vT_star);
    for (std::size_t i = 0; i < n; ++i) res[i] += pen * r.vT_star[i] + ufree[i];
    r.el_residual = l2_norm(p_.mesh, res);
    return r;
}

double HumSolver::euler_lagrange(const HumResult& r, std::span<const double> wT) const {
    // sum_k dt <F_k, w-pairing_k>_omega + <u0, w(0)> + penalty <vT*, wT>
    const auto gw = control_from(wT);
    double s = 0.0;
    for (std::size_t k = 0; k < gw.size(); ++k) s += p_.tg.dt * p_.mesh.h * dot(r.control[k], gw[k]);
    s += inner(p_.mesh, p_.u0, adjoint_initial(wT));
    s += p_.penalty * inner(p_.mesh, r.vT_star, wT);
    return s;
}

ObservabilityEstimate HumSolver::estimate_CT(std::size_t iters) const {
    if (iters < 10) throw Error(ErrorKind::InvalidConfig, "estimate_CT needs at least 10 iterations");
    const std::size_t n = p_.mesh.n;
    const double pen = p_.penalty;
    auto shifted = [&](const Vec& x) {
        Vec y = gramian_apply(x);
        for (std::size_t i = 0; i < n; ++i) y[i] += pen * x[i];
        return y;
    };
    ObservabilityEstimate out;
    // Start from the lowest Dirichlet mode: smooth and nonzero in every subregion.
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(std::numbers::pi * p_.mesh.nodes[i]);
    Vec y(n, 0.0);
    double best = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        const double xn = std::sqrt(dot(x, x));
        for (auto& v : x) v /= xn;
        const Vec ex = adjoint_initial(x);
        const double num = dot(ex, ex);
        const double den = dot(x, gramian_apply(x));
        out.iterations = it + 1;
        // A Gramian form below rounding relative to the observed energy means
        // the observation cannot see this direction at working precision.
        if (!(den > std::numeric_limits<double>::epsilon() * num)) {
            out.unbounded = true;
            out.C_T_est = std::numeric_limits<double>::infinity();
            out.witness = x;
            return out;
        }
        const double ratio = num / den;
        if (ratio > best) {
            best = ratio;
            out.witness = x;
        }
        // x <- (Lambda + pen)^{-1} E^T E x, with E^T the homogeneous forward map
        const Vec rhs = free_final(ex);
        const double rn = std::sqrt(dot(rhs, rhs));
        if (rn == 0.0) break;
        conjugate_gradient(shifted, rhs, y, 1e-8, p_.cg_max_iter, dot);
        x = y;
    }
    out.C_T_est = best;
    return out;
}

void write_control_csv_header(std::ostream& os) {
    os << "mu,reg,reg_param,T,n,nt,penalty,final_norm,control_cost,cg_iters,CT_est\n";
}

void write_control_csv_row(std::ostream& os, const HumProblem& p, const HumResult& r, double ct_est) {
    using io::fmt;
    os << fmt(p.op.spec.mu) << ',' << to_string(p.op.spec.reg) << ',' << fmt(p.op.spec.reg_param) << ','
       << fmt(p.tg.T) << ',' << p.mesh.n << ',' << p.tg.nt << ',' << fmt(p.penalty) << ','
       << fmt(r.final_norm) << ',' << fmt(r.control_cost) << ',' << r.cg_iters << ',' << fmt(ct_est)
       << '\n';
}

void write_control_dat(std::ostream& os, const HumProblem& p, const HumResult& r) {
    os << "# t x f\n";
    for (std::size_t k = 0; k < r.control.size(); ++k) {
        const std::string t = io::fmt(p.tg.time(k + 1));
        for (std::size_t i = 0; i < p.mesh.n; ++i) {
            os << t << ' ' << io::fmt(p.mesh.nodes[i]) << ' ' << io::fmt(r.control[k][i]) << '\n';
        }
        os << '\n';
    }
}

}  // namespace singheat
