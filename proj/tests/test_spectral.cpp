#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "singheat/errors.hpp"
#include "singheat/hardy.hpp"
#include "singheat/spectral.hpp"

using namespace singheat;

namespace {

// Dense operator built from the formula, independent of assemble().
Eigen::MatrixXd dense_operator(std::size_t n, double mu, double eps) {
    const double h = 1.0 / static_cast<double>(n + 1);
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        const double x = static_cast<double>(i + 1) * h;
        const double d = std::min(x, 1.0 - x);
        a(i, i) = 2.0 / (h * h) - mu / (d * d + eps * eps);
        if (i + 1 < N) a(i, i + 1) = a(i + 1, i) = -1.0 / (h * h);
    }
    return a;
}

}  // namespace

TEST_CASE("Dirichlet Laplacian ground state") {
    const auto m = build_mesh(2000);
    const auto sp = ground_state(m, 0.0, 0.1);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(sp.lambda0 / pi2 - 1.0) < 1e-3);
    CHECK(sp.residual <= 1e-10 * sp.operator_norm);
    double nrm = 0.0;
    for (double v : sp.phi0) {
        nrm += m.h * v * v;
        CHECK(v >= 0.0);
    }
    CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sp.lambda1 > sp.lambda0);
}

TEST_CASE("critical coefficient stays bounded") {
    const auto sp = ground_state(build_mesh(2000), 0.25, 0.01);
    CHECK(std::isfinite(sp.lambda0));
    CHECK(std::abs(sp.lambda0) < 50.0);
}

TEST_CASE("ground states agree with the dense oracle") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> umu(-1.0, 2.0);
    std::uniform_real_distribution<double> ueps(0.02, 0.3);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = 60 + 10 * static_cast<std::size_t>(trial % 15);
        const double mu = umu(rng);
        const double eps = ueps(rng);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_operator(n, mu, eps));
        const auto sp = ground_state(build_mesh(n), mu, eps);
        CHECK(std::abs(sp.lambda0 - es.eigenvalues()(0)) < 1e-10 * std::max(1.0, std::abs(es.eigenvalues()(0))));
        CHECK(std::abs(sp.lambda1 - es.eigenvalues()(1)) < 1e-10 * std::max(1.0, std::abs(es.eigenvalues()(1))));
        // eigenvector up to normalization
        const Eigen::VectorXd ref = es.eigenvectors().col(0);
        const double h = 1.0 / static_cast<double>(n + 1);
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += sp.phi0[i] * std::sqrt(h) * ref(static_cast<Eigen::Index>(i));
        CHECK(std::abs(std::abs(dot) - 1.0) < 1e-9);
    }
}

TEST_CASE("Rayleigh quotient reproduces the eigenvalue") {
    const auto m = build_mesh(300);
    const double mu = 0.5;
    const double eps = 0.05;
    const auto sp = ground_state(m, mu, eps);
    const auto f = build_forms(m, 1.5);
    Vec w(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        w[i] = m.h / (m.delta[i] * m.delta[i] + eps * eps);
    }
    const double num = QuadForms::eval(f.stiffness, sp.phi0) - mu * QuadForms::eval(w, sp.phi0);
    const double den = QuadForms::eval(f.mass, sp.phi0);
    CHECK(std::abs(num / den - sp.lambda0) < 1e-10 * sp.operator_norm);
}

TEST_CASE("supercritical sweep decreases") {
    const auto m = build_mesh(1000);
    const double eps[] = {0.1, 0.05, 0.025, 0.0125};
    const double betas[] = {0.2};
    const auto s = blowup_sweep(m, 0.5, eps, betas);
    CHECK(s.regime == Regime::Supercritical);
    CHECK(s.lambda_decreasing);
    for (std::size_t j = 1; j < 4; ++j) CHECK(s.points[j].lambda0 < s.points[j - 1].lambda0);
    for (const auto& p : s.points) CHECK(p.residual <= 1e-10 * p.operator_norm);
}

TEST_CASE("eigenvalue is monotone in eps for any coefficient sign") {
    const auto m = build_mesh(400);
    for (double mu : {0.2, 0.25, 1.0}) {
        double prev = -1e300;
        for (double eps : {0.0125, 0.025, 0.05, 0.1}) {
            const double l = ground_state(m, mu, eps).lambda0;
            CHECK(l >= prev);
            prev = l;
        }
    }
}

TEST_CASE("sweep guards") {
    const auto m = build_mesh(100);
    const double fine[] = {0.1, 0.05};
    const double betas[] = {0.2};
    try {
        blowup_sweep(m, 0.5, fine, betas);
        FAIL("expected under-resolved");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnderResolved);
    }
    const double increasing[] = {0.1, 0.2};
    CHECK_THROWS_AS(blowup_sweep(build_mesh(1000), 0.5, increasing, betas), Error);
    CHECK_THROWS_AS(ground_state(m, 0.5, 0.0), Error);
}

TEST_CASE("localization norms of a known profile") {
    const auto m = build_mesh(999);
    Vec phi(m.n);
    for (std::size_t i = 0; i < m.n; ++i) phi[i] = std::sqrt(2.0) * std::sin(std::numbers::pi * m.nodes[i]);
    const auto whole = localization(m, phi, 0.0);
    CHECK(whole.l2 == doctest::Approx(1.0).epsilon(1e-6));
    // |phi'|^2 integrates to pi^2; the node set leaves out the two boundary
    // cells, which carry about 4 pi^2 h of it
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(whole.h1 * whole.h1 == doctest::Approx(1.0 + pi2 - 4.0 * pi2 * m.h).epsilon(1e-4));
    const auto inner_part = localization(m, phi, 0.25);
    // integral over [1/4, 3/4] of 2 sin^2(pi x) = 1/2 + 1/pi
    CHECK(inner_part.l2 * inner_part.l2 == doctest::Approx(0.5 + 1.0 / std::numbers::pi).epsilon(5e-3));
    CHECK(inner_part.h1 < whole.h1);
}

TEST_CASE("power fit recovers synthetic exponents") {
    std::vector<SpectralPoint> pts;
    for (double eps : {0.1, 0.05, 0.025}) {
        SpectralPoint p;
        p.eps = eps;
        p.lambda0 = -3.0 * std::pow(eps, -1.5);
        pts.push_back(p);
    }
    SpectralPoint positive;
    positive.eps = 0.2;
    positive.lambda0 = 4.0;
    pts.push_back(positive);
    const auto fit = fit_power_law(pts);
    REQUIRE(fit.valid);
    CHECK(fit.points == 3);
    CHECK(fit.p == doctest::Approx(1.5));
    CHECK(fit.c == doctest::Approx(3.0));
}

TEST_CASE("sweep outputs") {
    const auto m = build_mesh(200);
    const double eps[] = {0.2, 0.1};
    const double betas[] = {0.2, 0.3};
    const auto s = blowup_sweep(m, 1.0, eps, betas);
    std::ostringstream os;
    write_blowup_csv(os, s);
    const std::string csv = os.str();
    CHECK(csv.rfind("mu,eps,n,beta,lambda0,loc_l2,loc_h1\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    const std::string js = fit_json(s);
    CHECK(js.find("\"regime\": \"supercritical\"") != std::string::npos);
}
