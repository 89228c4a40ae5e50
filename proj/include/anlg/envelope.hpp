#pragma once

#include "anlg/grid_function.hpp"
#include "anlg/regions.hpp"

namespace anlg {

/// Affine function p(x) = dot(g, x) + b.
struct Plane {
    Vec g;
    double b = 0;
};

/// Concave envelope of u+ over the closed ball of `ball_radius`, sampled on
/// u's grid.  gamma is zero outside the ball; facets are the upper faces of
/// the convex hull of the lifted node cloud, so gamma at any x equals the
/// minimum of the facet planes.  node_facets lists, per node, the facets
/// whose plane is minimal there up to a tie tolerance; at ridge nodes that is
/// several facets and their gradients span the supergradient set.
struct ConcaveEnvelope {
    GridFunction gamma;
    std::vector<Plane> facets;
    std::vector<std::vector<int32_t>> node_facets;
    std::vector<uint8_t> contact;  // gamma - u <= contact_tol
    double contact_tol = 0;
    double ball_radius = 3;

    /// Gradient of the first minimal facet at the node; zero outside the ball.
    Vec gradient(size_t node) const;
};

struct EnvelopeOptions {
    /// Contact slack; <= 0 means 2 * grid_hessian_bound(u) * max_i h_i^2,
    /// twice the multilinear interpolation error bound of the data.
    double contact_tol = 0;
    /// Checked on grid nodes outside the unit ball and on the exterior rule.
    bool require_nonpositive_outside_b1 = true;
    double ball_radius = 3.0;
    /// Slack for collecting tied minimal facets at a node (absolute, times
    /// 1 + |gamma|).
    double tie_tol = 1e-9;
};

/// Supported for n = 1 and n = 2 grids (hulls in higher dimension are out of
/// scope).  Throws std::invalid_argument when the positivity precondition is
/// requested and violated.
ConcaveEnvelope concave_envelope(const GridFunction& u, const EnvelopeOptions& opt = {});

/// Measure of the convex hull of a point set: interval length for 1-d
/// points, polygon area for 2-d.
double convex_hull_measure(std::vector<Vec> pts);

/// Measure of the supergradient image over the closed rectangle: convex hull
/// of the minimal-facet gradients collected at grid nodes inside it.
double gradient_image_measure(const ConcaveEnvelope& env, const AnisoRect& rect);

}  // namespace anlg
