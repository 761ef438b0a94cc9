#include "singheat/stabilization.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "singheat/cg.hpp"
#include "singheat/errors.hpp"
#include "singheat/io.hpp"
#include "singheat/parallel.hpp"
#include "singheat/spectral.hpp"

namespace singheat {

namespace {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Shared setup: mesh, operator, stepper and ground state for one problem.
struct CostContext {
    Mesh1D mesh;
    TridiagOperator op;
    TimeGrid tg;
    SpectralPoint gs;
    Vec u0;
    Vec c;  ///< trapezoid time weights, levels 0..nt
    double theta = 1.0;

    explicit CostContext(const CostProblem& p)
        : mesh(build_mesh(p.n)),
          op(assemble({p.mu, Regularization::Quadratic, p.eps}, mesh)),
          tg(make_time_grid(p.T, p.nt, p.scheme)) {
        if (!(p.eps > 0.0)) throw Error(ErrorKind::InvalidConfig, "eps must be positive");
        if (mesh.h > p.eps / 10.0) {
            throw Error(ErrorKind::UnderResolved, "mesh under-resolves eps: need h <= eps/10");
        }
        if (p.mask.size() != p.n) throw Error(ErrorKind::Dimension, "control mask length mismatch");
        gs = ground_state(mesh, p.mu, p.eps);
        if (p.u0.empty()) {
            u0 = gs.phi0;
        } else {
            if (p.u0.size() != p.n) throw Error(ErrorKind::Dimension, "initial datum length mismatch");
            u0 = p.u0;
        }
        c.assign(tg.nt + 1, tg.dt);
        c.front() = c.back() = 0.5 * tg.dt;
        theta = p.scheme == TimeScheme::ImplicitEuler ? 1.0 : 0.5;
    }
};

std::vector<Vec> unflatten(const Vec& x, std::size_t nt, std::size_t n) {
    std::vector<Vec> f(nt, Vec(n));
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t i = 0; i < n; ++i) f[k][i] = x[k * n + i];
    }
    return f;
}

Vec flatten(const std::vector<Vec>& f, std::span<const std::uint8_t> mask) {
    const std::size_t n = mask.size();
    Vec x(f.size() * n);
    for (std::size_t k = 0; k < f.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) x[k * n + i] = mask[i] ? f[k][i] : 0.0;
    }
    return x;
}

CostResult evaluate(const CostContext& ctx, const CostProblem& p, const Stepper& st,
                    const std::vector<Vec>& f) {
    CostResult r;
    r.lambda0 = ctx.gs.lambda0;
    {
        Vec res = ctx.op.apply(ctx.gs.phi0);
        for (std::size_t i = 0; i < res.size(); ++i) res[i] -= ctx.gs.lambda0 * ctx.gs.phi0[i];
        r.eigen_residual = l2_norm(ctx.mesh, res);
    }
    r.phi0_l2_omega_sq = masked_norm2(ctx.mesh, ctx.gs.phi0, p.mask);
    r.control = f;
    for (auto& fk : r.control) {
        for (std::size_t i = 0; i < fk.size(); ++i) {
            if (!p.mask[i]) fk[i] = 0.0;
        }
    }
    const auto u = st.forward(ctx.u0, r.control);
    double J = 0.0;
    for (std::size_t j = 0; j <= ctx.tg.nt; ++j) {
        const double nn = inner(ctx.mesh, u[j], u[j]);
        J += 0.5 * ctx.c[j] * nn;
        r.state_norms.push_back(std::sqrt(nn));
        r.rho_traj.push_back(inner(ctx.mesh, u[j], ctx.gs.phi0));
    }
    for (const auto& fk : r.control) {
        J += 0.5 * ctx.tg.dt * inner(ctx.mesh, fk, fk);
        r.zeta_traj.push_back(inner(ctx.mesh, fk, ctx.gs.phi0));
    }
    r.J_opt = J;
    r.analytic_lower = analytic_lower_bound(r.lambda0, r.phi0_l2_omega_sq, p.T);
    return r;
}

}  // namespace

LowerBound analytic_lower_bound(double lambda0, double phi0_l2_omega_sq, double T) {
    LowerBound b;
    if (!(lambda0 < 0.0)) return b;
    b.applicable = true;
    const double kappa = -lambda0;
    // expm1 keeps both terms accurate as kappa -> 0
    const double first = std::expm1(2.0 * kappa * T) / (16.0 * kappa);
    const double second = phi0_l2_omega_sq > 0.0
                              ? -kappa * std::expm1(-2.0 * kappa * T) / (4.0 * phi0_l2_omega_sq)
                              : std::numeric_limits<double>::infinity();
    b.value = std::min(first, second);
    return b;
}

CostResult evaluate_cost(const CostProblem& p, const std::vector<Vec>& f) {
    const CostContext ctx(p);
    const Stepper st(ctx.op, ctx.tg);
    if (f.size() != ctx.tg.nt) throw Error(ErrorKind::Dimension, "control needs one entry per step");
    auto r = evaluate(ctx, p, st, f);
    r.J_free = evaluate(ctx, p, st, {}).J_opt;
    return r;
}

CostResult minimize_cost(const CostProblem& p) {
    const CostContext ctx(p);
    const Stepper st(ctx.op, ctx.tg);
    const std::size_t n = p.n;
    const std::size_t nt = ctx.tg.nt;
    const double h = ctx.mesh.h;

    // In Euclidean coordinates (J divided by h) the Hessian is
    // H = chi L^T C L chi + dt I and the linear term is b = -chi L^T C u_free.
    const auto ufree = st.forward(ctx.u0, {});
    double c0 = 0.0;
    for (std::size_t j = 0; j <= nt; ++j) c0 += 0.5 * ctx.c[j] * dot(ufree[j], ufree[j]);
    Vec b = flatten(st.adjoint_sources(ufree, ctx.c), p.mask);
    for (auto& v : b) v = -v;

    auto hess = [&](const Vec& x) {
        const Vec zero(n, 0.0);
        const auto y = st.forward(zero, unflatten(x, nt, n));
        Vec out = flatten(st.adjoint_sources(y, ctx.c), p.mask);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += ctx.tg.dt * x[i];
        return out;
    };

    Vec x(nt * n, 0.0);
    std::vector<double> history{h * c0};
    // J(x) = c0 + 1/2 <x, Hx> - <b, x> = c0 - 1/2 <x, b> - 1/2 <x, r> with r = b - Hx
    const auto track = [&](const Vec& xi, const Vec& ri) {
        history.push_back(h * (c0 - 0.5 * dot(xi, b) - 0.5 * dot(xi, ri)));
    };
    const auto stats = conjugate_gradient(hess, b, x, p.cg_tol, p.cg_max_iter, dot,
                                          std::function<void(const Vec&, const Vec&)>(track));

    auto r = evaluate(ctx, p, st, unflatten(x, nt, n));
    r.J_free = h * c0;
    r.cg_iters = stats.iterations;
    r.converged = stats.converged;
    r.J_history = std::move(history);
    return r;
}

DuhamelCheck verify_duhamel(const CostProblem& p, const CostResult& r) {
    const double dt = p.T / static_cast<double>(p.nt);
    const double th = p.scheme == TimeScheme::ImplicitEuler ? 1.0 : 0.5;
    if (r.rho_traj.size() != p.nt + 1 || r.zeta_traj.size() != p.nt) {
        throw Error(ErrorKind::Dimension, "trajectory length does not match the time grid");
    }
    DuhamelCheck out;
    double magnitude = 0.0;
    for (std::size_t k = 0; k < p.nt; ++k) {
        const double rho_th = th * r.rho_traj[k + 1] + (1.0 - th) * r.rho_traj[k];
        const double d = r.rho_traj[k + 1] - r.rho_traj[k] + dt * r.lambda0 * rho_th - dt * r.zeta_traj[k];
        out.residual += std::abs(d);
        // <A u, phi> - lambda0 <u, phi> = <u, A phi - lambda0 phi>
        const double u_th = th * r.state_norms[k + 1] + (1.0 - th) * r.state_norms[k];
        out.tolerance += dt * u_th * r.eigen_residual;
        magnitude += std::abs(r.rho_traj[k + 1]) + std::abs(r.rho_traj[k]) +
                     dt * std::abs(r.lambda0 * rho_th) + dt * std::abs(r.zeta_traj[k]);
    }
    out.tolerance += 1e-12 * magnitude;
    return out;
}

std::vector<CostResult> cost_sweep(const CostProblem& base, std::span<const double> eps_list) {
    for (std::size_t j = 1; j < eps_list.size(); ++j) {
        if (!(eps_list[j] < eps_list[j - 1])) {
            throw Error(ErrorKind::InvalidConfig, "eps list must be strictly decreasing");
        }
    }
    std::vector<CostResult> out(eps_list.size());
    parallel_for(eps_list.size(), [&](std::size_t j) {
        CostProblem p = base;
        p.eps = eps_list[j];
        out[j] = minimize_cost(p);
    });
    return out;
}

void write_cost_csv_header(std::ostream& os) { os << "mu,eps,T,lambda0,J_opt,analytic_lower,cg_iters\n"; }

void write_cost_csv_row(std::ostream& os, const CostProblem& p, const CostResult& r) {
    using io::fmt;
    const double lower = r.analytic_lower.applicable ? r.analytic_lower.value
                                                     : std::numeric_limits<double>::quiet_NaN();
    os << fmt(p.mu) << ',' << fmt(p.eps) << ',' << fmt(p.T) << ',' << fmt(r.lambda0) << ','
       << fmt(r.J_opt) << ',' << fmt(lower) << ',' << r.cg_iters << '\n';
}

}  // namespace singheat
