#include "singheat/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "singheat/errors.hpp"
#include "singheat/io.hpp"
#include "singheat/parallel.hpp"

namespace singheat {

namespace {

constexpr long double kNegInf = -std::numeric_limits<long double>::infinity();

/// Running log-sum-exp.
struct LogSum {
    long double max = kNegInf;
    long double scaled = 0.0L;  ///< sum of exp(term - max)

    void add(long double term) {
        if (term == kNegInf) return;
        if (term <= max) {
            scaled += std::exp(term - max);
        } else {
            scaled = scaled * std::exp(max - term) + 1.0L;
            max = term;
        }
    }
    long double value() const { return max == kNegInf ? kNegInf : max + std::log(scaled); }
};

long double log_sum(long double a, long double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const long double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

long double safe_log(long double x) { return x > 0.0L ? std::log(x) : kNegInf; }

/// Per-node and per-level pieces of the log integrands, shared by all runs.
struct LogWeights {
    Vec log_delta, log_E, log_layer;  ///< log delta, log (delta/r0)^lambda phi, log (delta/r0)^(lambda - 2)
    std::vector<long double> tau_gap;  ///< max tau - tau
    long double sigma_gap = 0.0L;      ///< C_lambda - max tau
    Vec theta, log_theta, theta_excess;  ///< per level 1..nt-1; excess = theta - min theta
};

LogWeights log_weights(const Mesh1D& mesh, const WeightFields& f, const TimeGrid& tg) {
    const auto& p = f.params;
    LogWeights w;
    const long double tau_max = *std::max_element(f.tau.begin(), f.tau.end());
    w.sigma_gap = f.C_lambda - tau_max;
    for (std::size_t i = 0; i < mesh.n; ++i) {
        const double d = mesh.delta[i];
        w.log_delta.push_back(std::log(d));
        w.log_E.push_back(p.lambda * std::log(d / p.r0) + p.lambda * f.psi[i]);
        w.log_layer.push_back((p.lambda - 2.0) * std::log(d / p.r0));
        w.tau_gap.push_back(tau_max - f.tau[i]);
    }
    for (std::size_t k = 1; k < tg.nt; ++k) {
        const double th = theta_at(tg.time(k), p.T, p.theta_power).theta;
        w.theta.push_back(th);
        w.log_theta.push_back(std::log(th));
    }
    const double th_min = *std::min_element(w.theta.begin(), w.theta.end());
    for (double th : w.theta) w.theta_excess.push_back(th - th_min);
    return w;
}

CarlemanSides evaluate_run(const Mesh1D& mesh, const WeightFields& f, const RegionMasks& rg, const LogWeights& w,
                           const TimeGrid& tg, const Trajectory& v) {
    const auto& p = f.params;
    const long double lam = p.lambda, R = p.R;
    const long double log_w = std::log(static_cast<long double>(tg.dt) * mesh.h);
    const long double log_lam = std::log(lam), log_R = std::log(R);
    const long double log_A1 = std::log(static_cast<long double>(p.A1));
    std::array<LogSum, 5> L;
    std::array<LogSum, 2> Rs;
    const std::size_t n = mesh.n;
    for (std::size_t k = 1; k < tg.nt; ++k) {
        const long double log_th = w.log_theta[k - 1];
        const long double th = w.theta[k - 1];
        // -2 R sigma relative to the common reference
        const long double level = -2.0L * R * w.theta_excess[k - 1] * w.sigma_gap;
        const Vec& vk = v[k];
        for (std::size_t i = 0; i < n; ++i) {
            const long double ld = w.log_delta[i];
            const double left = i > 0 ? vk[i - 1] : 0.0;
            const double right = i + 1 < n ? vk[i + 1] : 0.0;
            const long double vx = (right - left) / (2.0L * mesh.h);
            const long double lv2 = safe_log(static_cast<long double>(vk[i]) * vk[i]);
            const long double lvx2 = safe_log(vx * vx);
            const long double base = log_w + level - 2.0L * R * th * w.tau_gap[i];
            const long double logE = w.log_E[i];
            const long double grad = (2.0L - p.gamma) * ld + lvx2;
            const long double hardy = log_A1 - p.gamma * ld + lv2;
            L[0].add(log_R + log_th + base + log_sum(grad, hardy));
            if (rg.in_boundary_layer[i]) {
                L[1].add(log_lam + log_R + log_th + w.log_layer[i] + base + lvx2);
                L[3].add(3.0L * (log_R + log_th) + 2.0L * ld + base + lv2);
            }
            const long double grad_o = 2.0L * log_lam + log_R + log_th + logE + base + lvx2;
            const long double mass_o = 4.0L * log_lam + 3.0L * (log_R + log_th + logE) + base + lv2;
            if (rg.in_o_set[i]) {
                L[2].add(grad_o);
                L[4].add(mass_o);
            }
            if (rg.in_omega0[i]) {
                Rs[0].add(mass_o);
                Rs[1].add(grad_o);
            }
        }
    }
    CarlemanSides s;
    s.log_lhs = kNegInf;
    for (std::size_t j = 0; j < 5; ++j) {
        s.log_lhs_terms[j] = L[j].value();
        s.log_lhs = log_sum(s.log_lhs, s.log_lhs_terms[j]);
    }
    s.log_rhs = kNegInf;
    for (std::size_t j = 0; j < 2; ++j) {
        s.log_rhs_terms[j] = Rs[j].value();
        s.log_rhs = log_sum(s.log_rhs, s.log_rhs_terms[j]);
    }
    if (s.log_lhs == kNegInf) {
        s.ratio = 0.0;
    } else if (s.log_rhs == kNegInf) {
        s.ratio = std::numeric_limits<double>::infinity();
    } else {
        s.ratio = static_cast<double>(std::exp(s.log_lhs - s.log_rhs));
    }
    return s;
}

}  // namespace

CarlemanReport empirical_carleman(const Mesh1D& mesh, const WeightFields& f, const TimeGrid& tg,
                                  const std::vector<Trajectory>& runs) {
    if (std::abs(tg.T - f.params.T) > 1e-12 * f.params.T) {
        throw Error(ErrorKind::SingularTime, "time grid horizon differs from the weight horizon");
    }
    if (f.psi.size() != mesh.n) throw Error(ErrorKind::Dimension, "weight fields do not match the mesh");
    for (const auto& v : runs) {
        if (v.size() != tg.nt + 1) throw Error(ErrorKind::Dimension, "run does not match the time grid");
        for (const auto& vk : v) {
            if (vk.size() != mesh.n) throw Error(ErrorKind::Dimension, "run does not match the mesh");
        }
    }
    const auto rg = build_regions(mesh, f.params.omega, f.params.omega0, f.params.r0);
    const auto w = log_weights(mesh, f, tg);

    CarlemanReport rep;
    rep.log_reference = static_cast<double>(2.0L * f.params.R *
                                            *std::min_element(w.theta.begin(), w.theta.end()) * w.sigma_gap);
    rep.runs.resize(runs.size());
    parallel_for(runs.size(), [&](std::size_t r) { rep.runs[r] = evaluate_run(mesh, f, rg, w, tg, runs[r]); });
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& s : rep.runs) {
        if (s.log_rhs == kNegInf && s.log_lhs != kNegInf) ++rep.property_failures;
        rep.min_ratio = std::min(rep.min_ratio, s.ratio);
        rep.max_ratio = std::max(rep.max_ratio, s.ratio);
    }
    if (rep.runs.empty()) rep.min_ratio = 0.0;
    return rep;
}

std::vector<Trajectory> random_adjoint_runs(const Mesh1D& mesh, const TridiagOperator& op, const TimeGrid& tg,
                                            std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Vec> data(count, Vec(mesh.n));
    for (auto& vT : data) {
        for (auto& x : vT) x = g(rng);
        const double nrm = l2_norm(mesh, vT);
        for (auto& x : vT) x /= nrm;
    }
    const Stepper st(op, tg);
    std::vector<Trajectory> runs(count);
    parallel_for(count, [&](std::size_t r) { runs[r] = st.adjoint(data[r]); });
    return runs;
}

R0Search find_R0(const Mesh1D& mesh, const WeightFields& f, const TimeGrid& tg,
                 const std::vector<Trajectory>& runs, double R_start, int max_doublings) {
    if (!(R_start > 0.0)) throw Error(ErrorKind::InvalidConfig, "R must be positive");
    R0Search out;
    WeightFields g = f;
    auto ratio_at = [&](double R) {
        g.params.R = R;
        const double m = empirical_carleman(mesh, g, tg, runs).max_ratio;
        out.history.emplace_back(R, m);
        return m;
    };
    double R = R_start;
    double cur = ratio_at(R);
    for (int i = 0; i < max_doublings; ++i) {
        const double next = ratio_at(2.0 * R);
        if (next <= 2.0 * cur) {
            out.found = true;
            out.R0 = R;
            return out;
        }
        R *= 2.0;
        cur = next;
    }
    return out;
}

void write_carleman_csv(std::ostream& os, const CarlemanReport& r) {
    os << "run,log_lhs,log_rhs,ratio\n";
    for (std::size_t i = 0; i < r.runs.size(); ++i) {
        const auto& s = r.runs[i];
        os << i << ',' << io::fmt(static_cast<double>(s.log_lhs)) << ',' << io::fmt(static_cast<double>(s.log_rhs))
           << ',' << io::fmt(s.ratio) << '\n';
    }
}

}  // namespace singheat
