#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "singheat/errors.hpp"
#include "singheat/hum.hpp"

using namespace singheat;

namespace {

Vec random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    Vec v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

HumProblem make_problem(std::size_t n, std::size_t nt, double T, double mu, double penalty,
                        Interval omega = {0.3, 0.7}) {
    HumProblem p;
    p.mesh = build_mesh(n);
    const OperatorSpec spec{mu, mu == 0.0 ? Regularization::None : Regularization::Shift,
                            mu == 0.0 ? 0.0 : static_cast<double>(n + 1)};
    p.op = assemble(spec, p.mesh);
    p.tg = make_time_grid(T, nt);
    p.mask = build_regions(p.mesh, omega, {0.4, 0.6}, 0.1).in_omega;
    p.u0.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.u0[i] = std::sin(std::numbers::pi * p.mesh.nodes[i]);
    p.penalty = penalty;
    return p;
}

}  // namespace

TEST_CASE("gramian is symmetric, positive and matches the observed energy") {
    std::mt19937_64 rng(7);
    for (double mu : {0.0, 0.25, -1.0}) {
        const HumSolver s(make_problem(120, 200, 0.5, mu, 1e-8));
        const std::size_t n = s.problem().mesh.n;
        const Vec zero(n, 0.0);
        for (double v : s.gramian_apply(zero)) CHECK(v == 0.0);
        for (int trial = 0; trial < 5; ++trial) {
            const Vec a = random_vec(rng, n);
            const Vec b = random_vec(rng, n);
            const Vec la = s.gramian_apply(a);
            const Vec lb = s.gramian_apply(b);
            const double ab = dot(la, b);
            const double ba = dot(a, lb);
            const double scale = std::sqrt(dot(la, la) * dot(b, b));
            CHECK(std::abs(ab - ba) <= 1e-11 * scale);
            // <Lambda a, a>_h equals the quadrature of the observed adjoint
            const double form = s.problem().mesh.h * dot(la, a);
            const double energy = s.gramian_energy(a);
            CHECK(form >= 0.0);
            CHECK(std::abs(form - energy) <= 1e-12 * std::max(1.0, energy));
        }
    }
}

TEST_CASE("null control in the reference configuration") {
    for (double mu : {-1.0, 0.0, 0.1, 0.25}) {
        CAPTURE(mu);
        const HumSolver s(make_problem(200, 400, 0.5, mu, 1e-8));
        const auto r = s.solve();
        const double u0n = l2_norm(s.problem().mesh, s.problem().u0);
        CHECK(r.converged);
        CHECK(r.cg_iters <= 500);
        CHECK(r.final_norm / u0n <= 1e-3);
        CHECK(std::isfinite(r.control_cost));
        CHECK(r.control_cost > 0.0);
        // u(T) = u_free(T) + Lambda vT = -penalty vT - residual
        Vec pred(r.vT_star.size());
        for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = -1e-8 * r.vT_star[i];
        CHECK(std::abs(l2_norm(s.problem().mesh, pred) - r.final_norm) <=
              r.el_residual + 1e-12 * u0n);
        CHECK(r.el_residual <= 1e-9 * r.free_final_norm);
        // control vanishes off omega
        const auto& mask = s.problem().mask;
        for (const auto& f : r.control) {
            for (std::size_t i = 0; i < f.size(); ++i) {
                if (!mask[i]) CHECK(f[i] == 0.0);
            }
        }
    }
}

TEST_CASE("euler-lagrange identity against random terminal data") {
    std::mt19937_64 rng(11);
    const HumSolver s(make_problem(100, 200, 0.5, 0.25, 1e-6));
    const auto r = s.solve();
    Vec res = s.gramian_apply(r.vT_star);
    const Vec uf = s.free_final(s.problem().u0);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] += 1e-6 * r.vT_star[i] + uf[i];
    for (int trial = 0; trial < 5; ++trial) {
        const Vec w = random_vec(rng, s.problem().mesh.n);
        const double el = s.euler_lagrange(r, w);
        // The identity equals the optimality residual tested against w.
        const double expected = inner(s.problem().mesh, res, w);
        const double scale = l2_norm(s.problem().mesh, uf) * l2_norm(s.problem().mesh, w);
        CHECK(std::abs(el - expected) <= 1e-10 * scale);
        CHECK(std::abs(el) <= 1e-8 * scale);
    }
}

TEST_CASE("zero initial datum gives the zero control") {
    auto p = make_problem(80, 100, 0.5, 0.1, 1e-8);
    std::fill(p.u0.begin(), p.u0.end(), 0.0);
    const auto r = HumSolver(p).solve();
    for (double v : r.vT_star) CHECK(v == 0.0);
    for (const auto& f : r.control) {
        for (double v : f) CHECK(v == 0.0);
    }
    CHECK(r.final_norm == 0.0);
}

TEST_CASE("final state shrinks with the penalty") {
    const auto a = HumSolver(make_problem(200, 400, 0.5, 0.0, 1e-6)).solve();
    const auto b = HumSolver(make_problem(200, 400, 0.5, 0.0, 1e-8)).solve();
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.final_norm >= 5.0 * b.final_norm);
}

TEST_CASE("observability estimate") {
    SUBCASE("full observation of the plain heat equation") {
        // Backward in time the adjoint norm only grows, so sum dt |g_k|^2 >= T |v(0)|^2.
        auto p = make_problem(100, 200, 0.5, 0.0, 1e-10);
        p.mask = full_mask(p.mesh);
        const auto est = HumSolver(p).estimate_CT(20);
        CHECK(!est.unbounded);
        CHECK(est.C_T_est > 0.0);
        CHECK(est.C_T_est <= 1.0 / 0.5 * (1.0 + 1e-9));
        CHECK(est.witness.size() == p.mesh.n);
    }
    SUBCASE("shorter horizon costs more") {
        const auto full = HumSolver(make_problem(100, 200, 0.5, 0.25, 1e-10)).estimate_CT(20);
        const auto half = HumSolver(make_problem(100, 200, 0.25, 0.25, 1e-10)).estimate_CT(20);
        CHECK(half.C_T_est > full.C_T_est);
    }
    SUBCASE("iteration floor") {
        CHECK_THROWS_AS(HumSolver(make_problem(50, 50, 0.5, 0.0, 1e-8)).estimate_CT(5), Error);
    }
}

TEST_CASE("problem validation") {
    auto p = make_problem(50, 50, 0.5, 0.0, 1e-8);
    p.u0.pop_back();
    CHECK_THROWS_AS(HumSolver{p}, Error);
    auto q = make_problem(50, 50, 0.5, 0.0, 1e-8);
    q.penalty = -1.0;
    CHECK_THROWS_AS(HumSolver{q}, Error);
}

TEST_CASE("control csv row") {
    const auto p = make_problem(50, 60, 0.5, 0.25, 1e-8);
    HumResult r;
    r.final_norm = 0.5;
    r.control_cost = 2.0;
    r.cg_iters = 17;
    std::ostringstream os;
    write_control_csv_header(os);
    write_control_csv_row(os, p, r, 3.25);
    CHECK(os.str() ==
          "mu,reg,reg_param,T,n,nt,penalty,final_norm,control_cost,cg_iters,CT_est\n"
          "0.25,shift,51,0.5,50,60,1e-08,0.5,2,17,3.25\n");
}
