#pragma once

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

namespace singheat {

struct CgStats {
    std::size_t iterations = 0;
    bool converged = false;
    double relative_residual = 0.0;
    /// min over search directions p of <A p, p> / <p, p>
    double min_rayleigh = 0.0;
};

/// Flat-vector conjugate gradient for a symmetric positive definite operator.
/// Stops when ||r|| <= tol * ||b||. x holds the initial guess on entry.
/// on_iter(x, r) is called after every update when provided.
template <class Vector, class Apply, class Dot>
CgStats conjugate_gradient(Apply&& apply, const Vector& b, Vector& x, double tol,
                           std::size_t max_iter, Dot&& dot,
                           const std::function<void(const Vector&, const Vector&)>& on_iter = {}) {
    CgStats st;
    st.min_rayleigh = std::numeric_limits<double>::infinity();
    const double bnorm = std::sqrt(dot(b, b));
    Vector r = b;
    {
        Vector ax = apply(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
    }
    if (bnorm == 0.0) {
        st.converged = true;
        return st;
    }
    double rr = dot(r, r);
    st.relative_residual = std::sqrt(rr) / bnorm;
    if (st.relative_residual <= tol) {
        st.converged = true;
        return st;
    }
    Vector p = r;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vector ap = apply(p);
        const double pap = dot(p, ap);
        const double pp = dot(p, p);
        if (pp > 0.0) st.min_rayleigh = std::min(st.min_rayleigh, pap / pp);
        if (!(pap > 0.0)) break;  // operator not positive along p
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        st.iterations = it + 1;
        st.relative_residual = std::sqrt(rr_new) / bnorm;
        if (on_iter) on_iter(x, r);
        if (st.relative_residual <= tol) {
            st.converged = true;
            break;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    return st;
}

}  // namespace singheat
