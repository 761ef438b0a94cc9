#include "singheat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "singheat/errors.hpp"

namespace singheat {

namespace {
// Node coordinates carry rounding of order 1e-16; membership tests use this
// slack so that mirrored nodes land in mirrored sets.
constexpr double kMembershipTol = 1e-12;
}  // namespace

Mesh1D build_mesh(std::size_t n) {
    if (n < 3) {
        throw Error(ErrorKind::InvalidMesh,
                    "mesh needs at least 3 interior nodes, got " + std::to_string(n));
    }
    Mesh1D mesh;
    mesh.n = n;
    mesh.h = 1.0 / static_cast<double>(n + 1);
    mesh.nodes.resize(n);
    mesh.delta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // distance counted in cells from the nearer endpoint, so delta is exactly symmetric
        const std::size_t left = i + 1;
        const std::size_t right = n - i;
        mesh.nodes[i] = static_cast<double>(left) * mesh.h;
        mesh.delta[i] = static_cast<double>(std::min(left, right)) * mesh.h;
    }
    return mesh;
}

std::vector<std::size_t> RegionMasks::indices(std::span<const std::uint8_t> mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out.push_back(i);
    }
    return out;
}

RegionMasks build_regions(const Mesh1D& mesh, Interval omega, Interval omega0, double r0) {
    const double gap = 2.0 * mesh.h;
    const bool ordered = 0.0 < omega.lo && omega.lo < omega0.lo && omega0.lo < omega0.hi &&
                         omega0.hi < omega.hi && omega.hi < 1.0;
    if (!ordered || omega0.lo - omega.lo < gap || omega.hi - omega0.hi < gap) {
        std::ostringstream msg;
        msg << "region nesting violated: need 0 < a < a0 < b0 < b < 1 with gaps >= 2h, got omega=("
            << omega.lo << "," << omega.hi << "), omega0=(" << omega0.lo << "," << omega0.hi
            << "), h=" << mesh.h;
        throw Error(ErrorKind::RegionNesting, msg.str());
    }
    if (!(r0 > 0.0) || r0 >= std::min(omega0.lo, 1.0 - omega0.hi)) {
        std::ostringstream msg;
        msg << "r0=" << r0 << " must satisfy 0 < r0 < min(a0, 1-b0)="
            << std::min(omega0.lo, 1.0 - omega0.hi);
        throw Error(ErrorKind::R0Overlap, msg.str());
    }

    RegionMasks m;
    m.omega = omega;
    m.omega0 = omega0;
    m.r0 = r0;
    const std::size_t n = mesh.n;
    m.in_omega.assign(n, 0);
    m.in_omega0.assign(n, 0);
    m.in_boundary_layer.assign(n, 0);
    m.in_o_set.assign(n, 0);
    m.in_o_tilde.assign(n, 0);

    auto inside = [](double x, Interval iv) {
        return x >= iv.lo - kMembershipTol && x <= iv.hi + kMembershipTol;
    };
    double best_left = 2.0;
    double best_right = 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = mesh.nodes[i];
        const double d = mesh.delta[i];
        m.in_omega[i] = inside(x, omega);
        m.in_omega0[i] = inside(x, omega0);
        m.in_boundary_layer[i] = d < r0 - kMembershipTol;
        m.in_o_tilde[i] = d > r0 + kMembershipTol;
        m.in_o_set[i] = m.in_o_tilde[i] && !m.in_omega0[i];
        if (std::abs(x - r0) < best_left) {
            best_left = std::abs(x - r0);
            m.sigma_left = i;
        }
        if (std::abs(x - (1.0 - r0)) < best_right) {
            best_right = std::abs(x - (1.0 - r0));
            m.sigma_right = i;
        }
    }
    return m;
}

std::vector<std::uint8_t> full_mask(const Mesh1D& mesh) {
    return std::vector<std::uint8_t>(mesh.n, 1);
}

std::vector<std::uint8_t> empty_mask(const Mesh1D& mesh) {
    return std::vector<std::uint8_t>(mesh.n, 0);
}

Vec quad_weights(const Mesh1D& mesh) { return Vec(mesh.n, mesh.h); }

double inner(const Mesh1D& mesh, std::span<const double> f, std::span<const double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return mesh.h * s;
}

double masked_norm2(const Mesh1D& mesh, std::span<const double> f,
                    std::span<const std::uint8_t> mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (mask[i]) s += f[i] * f[i];
    }
    return mesh.h * s;
}

double l2_norm(const Mesh1D& mesh, std::span<const double> f) {
    return std::sqrt(inner(mesh, f, f));
}

}  // namespace singheat
