#include "singheat/symtri.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "singheat/errors.hpp"

namespace singheat {

void SymTridiag::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = diag.size();
    if (n == 0) return;
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + off[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        y[i] = off[i - 1] * x[i - 1] + diag[i] * x[i] + off[i] * x[i + 1];
    }
    y[n - 1] = off[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

Vec SymTridiag::apply(std::span<const double> x) const {
    Vec y(diag.size());
    apply(x, y);
    return y;
}

double SymTridiag::norm_inf() const {
    double best = 0.0;
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        double row = std::abs(diag[i]);
        if (i > 0) row += std::abs(off[i - 1]);
        if (i + 1 < n) row += std::abs(off[i]);
        best = std::max(best, row);
    }
    return best;
}

std::pair<double, double> SymTridiag::gershgorin() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(off[i - 1]);
        if (i + 1 < n) r += std::abs(off[i]);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
}

SymTridiag scale_by_diagonal(const SymTridiag& a, std::span<const double> d) {
    const std::size_t n = a.size();
    if (d.size() != n) throw Error(ErrorKind::Dimension, "diagonal scaling size mismatch");
    Vec s(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(d[i] > 0.0)) throw Error(ErrorKind::Dimension, "diagonal scaling needs d > 0");
        s[i] = 1.0 / std::sqrt(d[i]);
    }
    SymTridiag out;
    out.diag.resize(n);
    out.off.resize(a.off.size());
    for (std::size_t i = 0; i < n; ++i) out.diag[i] = a.diag[i] * s[i] * s[i];
    for (std::size_t i = 0; i + 1 < n; ++i) out.off[i] = a.off[i] * s[i] * s[i + 1];
    return out;
}

TridiagFactor::TridiagFactor(const SymTridiag& a, std::size_t step_tag) {
    const std::size_t n = a.size();
    pivot_.resize(n);
    lower_.resize(n > 0 ? n - 1 : 0);
    upper_ = a.off;
    double dmax = 0.0;
    for (double d : a.diag) dmax = std::max(dmax, std::abs(d));
    const double thresh = 1e-14 * dmax;
    for (std::size_t i = 0; i < n; ++i) {
        double p = a.diag[i];
        if (i > 0) {
            lower_[i - 1] = a.off[i - 1] / pivot_[i - 1];
            p -= lower_[i - 1] * a.off[i - 1];
        }
        if (!(std::abs(p) > thresh)) throw SolverBreakdown(step_tag, i, p);
        pivot_[i] = p;
    }
}

void TridiagFactor::solve_in_place(std::span<double> x) const {
    const std::size_t n = pivot_.size();
    for (std::size_t i = 1; i < n; ++i) x[i] -= lower_[i - 1] * x[i - 1];
    x[n - 1] /= pivot_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - upper_[i] * x[i + 1]) / pivot_[i];
}

std::size_t sturm_count(const SymTridiag& a, double shift) {
    const std::size_t n = a.size();
    const double pivmin = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        q = a.diag[i] - shift - (i > 0 ? a.off[i - 1] * a.off[i - 1] / q : 0.0);
        if (std::abs(q) < pivmin) q = -pivmin;
        if (q < 0.0) ++count;
    }
    return count;
}

double eigenvalue_bisect(const SymTridiag& a, std::size_t k, std::size_t* steps) {
    if (k >= a.size()) throw Error(ErrorKind::Dimension, "eigenvalue index out of range");
    auto [lo, hi] = a.gershgorin();
    const double scale = std::max(std::abs(lo), std::abs(hi));
    lo -= 1e-12 * scale + std::numeric_limits<double>::min();
    hi += 1e-12 * scale + std::numeric_limits<double>::min();
    const double eps = std::numeric_limits<double>::epsilon();
    std::size_t it = 0;
    // invariant: count(lo) <= k < count(hi)
    while (it < 400) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi))) break;
        if (sturm_count(a, mid) > k) {
            hi = mid;
        } else {
            lo = mid;
        }
        ++it;
    }
    if (steps) *steps = it;
    return 0.5 * (lo + hi);
}

namespace {

// Solves (A - shift I) x = b by Gaussian elimination with partial pivoting.
// Tiny pivots are replaced by a floor so the solve stays finite near an
// eigenvalue, which is exactly the regime inverse iteration wants.
void shifted_solve(const SymTridiag& a, double shift, std::span<double> b) {
    const std::size_t n = a.size();
    const double floor = std::numeric_limits<double>::epsilon() * std::max(1.0, a.norm_inf());
    // row i holds entries at columns i, i+1, i+2 after elimination
    Vec d(n), u1(n, 0.0), u2(n, 0.0), sub(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a.diag[i] - shift;
        if (i + 1 < n) u1[i] = a.off[i];
        if (i > 0) sub[i] = a.off[i - 1];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(sub[i + 1]) > std::abs(d[i])) {
            // swap rows i and i+1
            std::swap(d[i], sub[i + 1]);
            std::swap(u1[i], d[i + 1]);
            std::swap(u2[i], u1[i + 1]);
            std::swap(b[i], b[i + 1]);
        }
        if (std::abs(d[i]) < floor) d[i] = d[i] < 0.0 ? -floor : floor;
        const double m = sub[i + 1] / d[i];
        d[i + 1] -= m * u1[i];
        u1[i + 1] -= m * u2[i];
        b[i + 1] -= m * b[i];
        sub[i + 1] = 0.0;
    }
    if (std::abs(d[n - 1]) < floor) d[n - 1] = d[n - 1] < 0.0 ? -floor : floor;
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        if (i + 1 < n) s -= u1[i] * b[i + 1];
        if (i + 2 < n) s -= u2[i] * b[i + 2];
        b[i] = s / d[i];
    }
}

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace

EigenPair eigenpair(const SymTridiag& a, std::size_t k, double rel_tol, std::size_t max_iter) {
    const std::size_t n = a.size();
    EigenPair out;
    out.value = eigenvalue_bisect(a, k, &out.bisection_steps);
    const double anorm = std::max(a.norm_inf(), std::numeric_limits<double>::min());

    // deterministic start vector with components in every mode
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(1.0 + 7.0 * static_cast<double>(i));
    double nx = norm2(x);
    for (double& v : x) v /= nx;

    Vec ax(n);
    double lambda = out.value;
    double res = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_iter; ++it) {
        shifted_solve(a, out.value, x);
        nx = norm2(x);
        if (!(nx > 0.0) || !std::isfinite(nx)) break;
        for (double& v : x) v /= nx;
        a.apply(x, ax);
        double rq = 0.0;
        for (std::size_t i = 0; i < n; ++i) rq += x[i] * ax[i];
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) r2 += (ax[i] - rq * x[i]) * (ax[i] - rq * x[i]);
        res = std::sqrt(r2);
        lambda = rq;
        out.inverse_steps = it + 1;
        if (res <= 0.1 * rel_tol * anorm) break;
    }
    if (!(res <= rel_tol * anorm)) {
        std::ostringstream msg;
        msg << "inverse iteration stalled for eigenvalue " << k << " near " << out.value
            << ": residual " << res << " after " << out.inverse_steps << " steps";
        throw Error(ErrorKind::EigenNonConvergence, msg.str());
    }
    // sign normalization: largest component positive
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(x[i]) > std::abs(x[imax])) imax = i;
    }
    if (x[imax] < 0.0) {
        for (double& v : x) v = -v;
    }
    out.value = lambda;
    out.vector = std::move(x);
    out.residual = res;
    return out;
}

double min_generalized_eigenvalue(const SymTridiag& a, std::span<const double> d) {
    return eigenvalue_bisect(scale_by_diagonal(a, d), 0);
}

}  // namespace singheat
