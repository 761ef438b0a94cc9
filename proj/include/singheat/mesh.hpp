#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace singheat {

using Vec = std::vector<double>;

/// Open interval (lo, hi) inside the unit domain.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
};

/// Uniform grid of interior nodes on (0,1) together with the distance to the
/// boundary at each node. Dirichlet values at 0 and 1 are implicit.
struct Mesh1D {
    std::size_t n = 0;
    double h = 0.0;
    Vec nodes;
    Vec delta;

    std::size_t size() const { return n; }
};

/// Throws InvalidMesh for n < 3.
Mesh1D build_mesh(std::size_t n);

/// Node sets for the control region and the weight construction.
///
/// omega and omega0 are closed node sets (a node sitting on an endpoint is
/// included); the boundary layer is the strict set {delta < r0}; o_tilde is
/// the strict set {delta > r0}; o_set removes omega0 from o_tilde.
struct RegionMasks {
    Interval omega;
    Interval omega0;
    double r0 = 0.0;

    std::vector<std::uint8_t> in_omega;
    std::vector<std::uint8_t> in_omega0;
    std::vector<std::uint8_t> in_boundary_layer;
    std::vector<std::uint8_t> in_o_set;
    std::vector<std::uint8_t> in_o_tilde;
    /// The two nodes nearest to the level set delta = r0 (left, right).
    std::size_t sigma_left = 0;
    std::size_t sigma_right = 0;

    static std::vector<std::size_t> indices(std::span<const std::uint8_t> mask);
};

/// Validates 0 < a < a0 < b0 < b < 1 with gaps of at least 2h (RegionNesting)
/// and r0 < min(a0, 1 - b0) (R0Overlap).
RegionMasks build_regions(const Mesh1D& mesh, Interval omega, Interval omega0, double r0);

/// Mask with every node of the mesh selected (observation or control on all of the domain).
std::vector<std::uint8_t> full_mask(const Mesh1D& mesh);
/// Mask with no node selected.
std::vector<std::uint8_t> empty_mask(const Mesh1D& mesh);

/// Trapezoid weights for functions vanishing at 0 and 1: w_i = h.
Vec quad_weights(const Mesh1D& mesh);

/// sum_i h f_i g_i
double inner(const Mesh1D& mesh, std::span<const double> f, std::span<const double> g);
/// sum_i h f_i^2 over the nodes selected by mask
double masked_norm2(const Mesh1D& mesh, std::span<const double> f,
                    std::span<const std::uint8_t> mask);
double l2_norm(const Mesh1D& mesh, std::span<const double> f);

}  // namespace singheat
