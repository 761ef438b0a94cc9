#include "singheat/discretization.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "singheat/errors.hpp"
#include "singheat/io.hpp"

namespace singheat {

const char* to_string(Regularization r) {
    switch (r) {
    case Regularization::None: return "none";
    case Regularization::Shift: return "shift";
    case Regularization::Quadratic: return "quadratic";
    }
    return "none";
}

Regularization parse_regularization(const std::string& s) {
    if (s == "none" || s == "raw") return Regularization::None;
    if (s == "shift") return Regularization::Shift;
    if (s == "quadratic") return Regularization::Quadratic;
    throw Error(ErrorKind::InvalidConfig,
                "regularization must be one of none, shift, quadratic (got '" + s + "')");
}

double potential_at(const OperatorSpec& spec, double d) {
    switch (spec.reg) {
    case Regularization::None: return spec.mu / (d * d);
    case Regularization::Shift: {
        const double s = d + 1.0 / spec.reg_param;
        return spec.mu / (s * s);
    }
    case Regularization::Quadratic:
        return spec.mu / (d * d + spec.reg_param * spec.reg_param);
    }
    return 0.0;
}

TridiagOperator assemble(const OperatorSpec& spec, const Mesh1D& mesh) {
    if (spec.reg != Regularization::None && !(spec.reg_param > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "regularization parameter must be positive");
    }
    TridiagOperator op;
    op.spec = spec;
    op.h = mesh.h;
    op.raw = spec.reg == Regularization::None;
    const std::size_t n = mesh.n;
    const double ih2 = 1.0 / (mesh.h * mesh.h);
    op.potential.resize(n);
    op.matrix.diag.resize(n);
    op.matrix.off.assign(n - 1, -ih2);
    for (std::size_t i = 0; i < n; ++i) {
        op.potential[i] = spec.mu == 0.0 ? 0.0 : potential_at(spec, mesh.delta[i]);
        op.matrix.diag[i] = 2.0 * ih2 - op.potential[i];
    }
    return op;
}

TimeGrid make_time_grid(double T, std::size_t nt, TimeScheme scheme) {
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw Error(ErrorKind::InvalidConfig, "time horizon must satisfy T > 0");
    }
    if (nt < 2) throw Error(ErrorKind::InvalidConfig, "time grid needs nt >= 2");
    TimeGrid tg;
    tg.T = T;
    tg.nt = nt;
    tg.dt = T / static_cast<double>(nt);
    tg.scheme = scheme;
    return tg;
}

namespace {

SymTridiag implicit_matrix(const SymTridiag& a, double c) {
    SymTridiag m;
    m.diag.resize(a.diag.size());
    m.off.resize(a.off.size());
    for (std::size_t i = 0; i < a.diag.size(); ++i) m.diag[i] = 1.0 + c * a.diag[i];
    for (std::size_t i = 0; i < a.off.size(); ++i) m.off[i] = c * a.off[i];
    return m;
}

double theta_of(TimeScheme s) { return s == TimeScheme::CrankNicolson ? 0.5 : 1.0; }

}  // namespace

Stepper::Stepper(const TridiagOperator& op, const TimeGrid& tg)
    : tg_(tg),
      n_(op.size()),
      theta_(theta_of(tg.scheme)),
      a_(op.matrix),
      factor_(implicit_matrix(op.matrix, theta_of(tg.scheme) * tg.dt), 1) {}

void Stepper::apply_explicit(std::span<const double> x, std::span<double> out) const {
    if (theta_ == 1.0) {
        std::copy(x.begin(), x.end(), out.begin());
        return;
    }
    a_.apply(x, out);
    const double c = (1.0 - theta_) * tg_.dt;
    for (std::size_t i = 0; i < n_; ++i) out[i] = x[i] - c * out[i];
}

void Stepper::step(std::span<const double> uk, std::span<const double> f,
                   std::span<double> out) const {
    apply_explicit(uk, out);
    if (!f.empty()) {
        for (std::size_t i = 0; i < n_; ++i) out[i] += tg_.dt * f[i];
    }
    factor_.solve_in_place(out);
}

namespace {

void check_sources(const std::vector<Vec>& f, std::size_t nt, std::size_t n) {
    if (f.empty()) return;
    if (f.size() != nt) {
        throw Error(ErrorKind::Dimension, "control trajectory has " + std::to_string(f.size()) +
                                              " steps, grid has " + std::to_string(nt));
    }
    for (const auto& fk : f) {
        if (fk.size() != n) throw Error(ErrorKind::Dimension, "control vector length mismatch");
    }
}

}  // namespace

Trajectory Stepper::forward(std::span<const double> u0, const std::vector<Vec>& f,
                            std::span<const std::uint8_t> mask) const {
    if (u0.size() != n_) throw Error(ErrorKind::Dimension, "initial datum length mismatch");
    check_sources(f, tg_.nt, n_);
    Trajectory u(tg_.nt + 1, Vec(n_));
    std::copy(u0.begin(), u0.end(), u[0].begin());
    Vec fk(n_);
    for (std::size_t k = 0; k < tg_.nt; ++k) {
        std::span<const double> src;
        if (!f.empty()) {
            for (std::size_t i = 0; i < n_; ++i) fk[i] = mask.empty() || mask[i] ? f[k][i] : 0.0;
            src = fk;
        }
        step(u[k], src, u[k + 1]);
    }
    return u;
}

Vec Stepper::forward_final(std::span<const double> u0, const std::vector<Vec>& f,
                           std::span<const std::uint8_t> mask) const {
    if (u0.size() != n_) throw Error(ErrorKind::Dimension, "initial datum length mismatch");
    check_sources(f, tg_.nt, n_);
    Vec cur(u0.begin(), u0.end());
    Vec next(n_);
    Vec fk(n_);
    for (std::size_t k = 0; k < tg_.nt; ++k) {
        std::span<const double> src;
        if (!f.empty()) {
            for (std::size_t i = 0; i < n_; ++i) fk[i] = mask.empty() || mask[i] ? f[k][i] : 0.0;
            src = fk;
        }
        step(cur, src, next);
        cur.swap(next);
    }
    return cur;
}

Trajectory Stepper::adjoint(std::span<const double> vT) const {
    if (vT.size() != n_) throw Error(ErrorKind::Dimension, "terminal datum length mismatch");
    Trajectory v(tg_.nt + 1, Vec(n_));
    std::copy(vT.begin(), vT.end(), v[tg_.nt].begin());
    Vec tmp(n_);
    for (std::size_t k = tg_.nt; k-- > 0;) {
        // P^T = (S B)^T = B S since both factors are symmetric
        tmp = v[k + 1];
        factor_.solve_in_place(tmp);
        apply_explicit(tmp, v[k]);
    }
    return v;
}

std::vector<Vec> Stepper::source_pairing(const Trajectory& v) const {
    std::vector<Vec> g(tg_.nt);
    for (std::size_t k = 0; k < tg_.nt; ++k) {
        if (theta_ == 1.0) {
            g[k] = v[k];
        } else {
            g[k] = v[k + 1];
            factor_.solve_in_place(g[k]);
        }
    }
    return g;
}

std::vector<Vec> Stepper::adjoint_sources(const Trajectory& y, std::span<const double> c) const {
    const std::size_t nt = tg_.nt;
    if (y.size() != nt + 1 || c.size() != nt + 1) {
        throw Error(ErrorKind::Dimension, "adjoint source trajectory length mismatch");
    }
    std::vector<Vec> grad(nt, Vec(n_));
    Vec q(n_);
    Vec tmp(n_);
    for (std::size_t i = 0; i < n_; ++i) q[i] = c[nt] * y[nt][i];
    for (std::size_t j = nt; j-- > 0;) {
        // q currently holds q^{j+1}; tmp = S q^{j+1}
        tmp = q;
        factor_.solve_in_place(tmp);
        for (std::size_t i = 0; i < n_; ++i) grad[j][i] = tg_.dt * tmp[i];
        if (j == 0) break;
        apply_explicit(tmp, q);
        for (std::size_t i = 0; i < n_; ++i) q[i] += c[j] * y[j][i];
    }
    return grad;
}

Trajectory step_forward(const TridiagOperator& op, const TimeGrid& tg, std::span<const double> u0,
                        const std::vector<Vec>& f, std::span<const std::uint8_t> mask) {
    return Stepper(op, tg).forward(u0, f, mask);
}

Trajectory step_adjoint(const TridiagOperator& op, const TimeGrid& tg, std::span<const double> vT) {
    return Stepper(op, tg).adjoint(vT);
}

DualityCheck check_duality(const Mesh1D& mesh, const Stepper& stepper, const Trajectory& u,
                     const Trajectory& v, const std::vector<Vec>& f, std::span<const double> u0,
                     std::span<const double> vT, std::span<const std::uint8_t> mask) {
    const TimeGrid& tg = stepper.grid();
    const std::size_t n = mesh.n;
    if (u.size() != tg.nt + 1 || v.size() != tg.nt + 1) {
        throw Error(ErrorKind::Dimension, "trajectories do not match the time grid");
    }
    if (u0.size() != n || vT.size() != n || u.back().size() != n || v.front().size() != n) {
        throw Error(ErrorKind::Dimension, "state length does not match the mesh");
    }
    if (!f.empty() && f.size() != tg.nt) {
        throw Error(ErrorKind::Dimension, "control trajectory does not match the time grid");
    }
    double lhs = inner(mesh, u.back(), vT);
    double rhs = inner(mesh, u0, v.front());
    double scale = std::abs(lhs) + std::abs(rhs);
    if (!f.empty()) {
        const auto g = stepper.source_pairing(v);
        for (std::size_t k = 0; k < tg.nt; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask.empty() || mask[i]) s += f[k][i] * g[k][i];
            }
            rhs += tg.dt * mesh.h * s;
            scale += tg.dt * mesh.h * std::abs(s);
        }
    }
    return {std::abs(lhs - rhs), scale};
}

void write_trajectory_csv(std::ostream& os, const Mesh1D& mesh, const TimeGrid& tg,
                          const Trajectory& traj) {
    io::CsvWriter csv(os, {"k", "t", "node", "value"});
    for (std::size_t k = 0; k < traj.size(); ++k) {
        for (std::size_t i = 0; i < mesh.n; ++i) {
            csv.cell(k).cell(tg.time(k)).cell(i + 1).cell(traj[k][i]);
            csv.end_row();
        }
    }
}

}  // namespace singheat
