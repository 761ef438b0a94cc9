#include "singheat/spectral.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "singheat/errors.hpp"
#include "singheat/io.hpp"
#include "singheat/parallel.hpp"
#include "singheat/symtri.hpp"

namespace singheat {

Localization localization(const Mesh1D& mesh, std::span<const double> phi, double beta) {
    Localization out;
    out.beta = beta;
    double l2 = 0.0;
    double grad = 0.0;
    for (std::size_t i = 0; i < mesh.n; ++i) {
        if (mesh.delta[i] < beta) continue;
        l2 += phi[i] * phi[i];
        if (i + 1 < mesh.n && mesh.delta[i + 1] >= beta) {
            const double d = phi[i + 1] - phi[i];
            grad += d * d;
        }
    }
    out.l2 = std::sqrt(mesh.h * l2);
    out.h1 = std::sqrt(mesh.h * l2 + grad / mesh.h);
    return out;
}

SpectralPoint ground_state(const Mesh1D& mesh, double mu, double eps, std::span<const double> betas) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidConfig, "regularization eps must be positive");
    const auto op = assemble({mu, Regularization::Quadratic, eps}, mesh);
    const auto ep = eigenpair(op.matrix, 0);
    SpectralPoint sp;
    sp.mu = mu;
    sp.eps = eps;
    sp.n = mesh.n;
    sp.lambda0 = ep.value;
    sp.lambda1 = eigenvalue_bisect(op.matrix, 1);
    sp.residual = ep.residual;
    sp.operator_norm = op.matrix.norm_inf();
    sp.phi0 = ep.vector;
    const double scale = 1.0 / std::sqrt(mesh.h);
    for (auto& v : sp.phi0) v *= scale;
    for (double b : betas) sp.loc.push_back(localization(mesh, sp.phi0, b));
    return sp;
}

const char* to_string(Regime r) {
    switch (r) {
    case Regime::Subcritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::Supercritical: return "supercritical";
    }
    return "subcritical";
}

Regime classify(double mu) {
    if (mu < 0.25) return Regime::Subcritical;
    if (mu == 0.25) return Regime::Critical;
    return Regime::Supercritical;
}

PowerFit fit_power_law(std::span<const SpectralPoint> points) {
    PowerFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : points) {
        if (!(p.lambda0 < 0.0)) continue;
        const double x = std::log(p.eps);
        const double y = std::log(-p.lambda0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++fit.points;
    }
    if (fit.points < 2) return fit;
    const double m = static_cast<double>(fit.points);
    const double den = m * sxx - sx * sx;
    if (den == 0.0) return fit;
    const double slope = (m * sxy - sx * sy) / den;
    const double intercept = (sy - slope * sx) / m;
    fit.valid = true;
    fit.p = -slope;
    fit.c = std::exp(intercept);
    return fit;
}

BlowupSweep blowup_sweep(const Mesh1D& mesh, double mu, std::span<const double> eps_list,
                         std::span<const double> betas) {
    for (std::size_t j = 0; j < eps_list.size(); ++j) {
        const double eps = eps_list[j];
        if (mesh.h > eps / 10.0) {
            std::ostringstream msg;
            msg << "mesh under-resolves eps=" << eps << ": need h <= eps/10 = " << eps / 10.0
                << ", have h=" << mesh.h;
            throw Error(ErrorKind::UnderResolved, msg.str());
        }
        if (j > 0 && !(eps < eps_list[j - 1])) {
            throw Error(ErrorKind::InvalidConfig, "eps list must be strictly decreasing");
        }
    }
    BlowupSweep out;
    out.mu = mu;
    out.regime = classify(mu);
    out.points.resize(eps_list.size());
    parallel_for(eps_list.size(), [&](std::size_t j) {
        out.points[j] = ground_state(mesh, mu, eps_list[j], betas);
    });
    for (std::size_t j = 1; j < out.points.size(); ++j) {
        if (!(out.points[j].lambda0 < out.points[j - 1].lambda0)) out.lambda_decreasing = false;
    }
    for (std::size_t b = 0; b < betas.size(); ++b) {
        bool dec = true;
        const SpectralPoint* prev = nullptr;
        for (const auto& p : out.points) {
            if (!(p.eps < betas[b] / 4.0)) continue;
            if (prev && !(p.loc[b].h1 < prev->loc[b].h1)) dec = false;
            prev = &p;
        }
        out.loc_decreasing.push_back(dec);
    }
    out.fit = fit_power_law(out.points);
    return out;
}

void write_blowup_csv(std::ostream& os, const BlowupSweep& sweep) {
    io::CsvWriter csv(os, {"mu", "eps", "n", "beta", "lambda0", "loc_l2", "loc_h1"});
    for (const auto& p : sweep.points) {
        for (const auto& l : p.loc) {
            csv.cell(p.mu).cell(p.eps).cell(p.n).cell(l.beta).cell(p.lambda0).cell(l.l2).cell(l.h1);
            csv.end_row();
        }
    }
}

std::string fit_json(const BlowupSweep& sweep) {
    nlohmann::ordered_json j;
    j["mu"] = sweep.mu;
    j["regime"] = to_string(sweep.regime);
    j["model"] = "lambda0 = -c * eps^(-p)";
    j["valid"] = sweep.fit.valid;
    j["c"] = sweep.fit.c;
    j["p"] = sweep.fit.p;
    j["points_used"] = sweep.fit.points;
    j["lambda_decreasing"] = sweep.lambda_decreasing;
    return j.dump(2) + "\n";
}

}  // namespace singheat
