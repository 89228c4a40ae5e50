#pragma once

#include <optional>
#include <variant>

#include "anlg/anisotropy.hpp"

namespace anlg {

/// The three ellipsoid-type region families.  All memberships are strict
/// inequalities, so boundaries count as outside.
///   E     : sum (y_i-x_i)^2 / r^{4/b_i}       < l^2
///   Emax  : sum (y_i-x_i)^2 / r^{2 b_max/b_i} < l^2
///   Theta : |y - x|_b < r                      (l ignored)
/// The Euclidean ball B_l(x) is E with r = 1.
enum class EllipsoidKind { E, Emax, Theta };

struct Ellipsoid {
    EllipsoidKind kind = EllipsoidKind::E;
    Vec center;
    double r = 1;
    double l = 1;
};

/// Axis-parallel open rectangle {|y_i - x_i| < half_i}.
struct AnisoRect {
    Vec center;
    Vec half;
};

using Region = std::variant<Ellipsoid, AnisoRect>;

inline Ellipsoid ellipsoid_E(const Vec& x, double r, double l) { return {EllipsoidKind::E, x, r, l}; }
inline Ellipsoid ellipsoid_Emax(const Vec& x, double r, double l) { return {EllipsoidKind::Emax, x, r, l}; }
inline Ellipsoid theta_ball(const Vec& x, double r) { return {EllipsoidKind::Theta, x, r, 1.0}; }
inline Ellipsoid euclid_ball(const Vec& x, double l) { return {EllipsoidKind::E, x, 1.0, l}; }

/// The comparison rectangle R_{r,l}(x) = {|y_i - x_i| < l^{2/b_min} r^{2/b_i}}.
AnisoRect comparison_rect(const Anisotropy& a, const Vec& x, double r, double l);

bool contains(const Anisotropy& a, const Region& reg, const Vec& y);
bool contains(const Anisotropy& a, const Ellipsoid& e, const Vec& y);
bool contains(const AnisoRect& r, const Vec& y);

/// Exact volumes: |E_{r,l}| = r^c l^n |B_1|, |E^max_{r,l}| = r^{c b_max/2} l^n |B_1|,
/// |Theta_r| = r^c |Theta_1|, |R| = prod 2 half_i.
double volume(const Anisotropy& a, const Region& reg);

/// Per-axis half-widths of the tightest axis-parallel bounding box.
Vec bounding_half_widths(const Anisotropy& a, const Region& reg);
Vec region_center(const Region& reg);

// ---------------------------------------------------------------------------
// Scaling maps.  All three families are diagonal with per-axis factor
// sigma^{p/b_i}:
//   T_beta(sigma) : p = 2          (e_i -> sigma^{2/b_i} e_i)
//   T_max(sigma)  : p = b_max      (e_i -> sigma^{b_max/b_i} e_i)
//   T_j(sigma)    : p = b_j        (e_j -> sigma e_j, e_i -> sigma^{b_j/b_i} e_i)
// det = sigma^{p c / 2}, and |T y|_b = sigma^{p/2} |y|_b.

struct ScalingMap {
    double p = 2;
    double sigma = 1;
};

ScalingMap t_beta(double sigma);
ScalingMap t_max(const Anisotropy& a, double sigma);
ScalingMap t_axis(const Anisotropy& a, int j, double sigma);

Vec map_apply(const Anisotropy& a, const ScalingMap& m, const Vec& y);
Vec map_apply_inverse(const Anisotropy& a, const ScalingMap& m, const Vec& y);
double map_det(const Anisotropy& a, const ScalingMap& m);

/// Image of a region under a scaling map; every family is closed under every
/// map, so this is exact parameter arithmetic.  Centers map along.
Region scale_apply(const Anisotropy& a, const ScalingMap& m, const Region& reg);

// ---------------------------------------------------------------------------
// Sampled inclusion certificates.

struct InclusionReport {
    uint64_t tested = 0;
    uint64_t violations = 0;
    std::optional<Vec> witness;  // first violating point of A \ B
    bool holds() const { return violations == 0; }
};

/// Checks A subset-of B by testing `samples` quasi-random points of A for
/// membership in B.  Points of A are drawn by lattice sampling of A's
/// bounding box with rejection.
InclusionReport inclusion_check(const Anisotropy& a, const Region& A, const Region& B,
                                uint64_t samples, uint64_t seed);

/// Draw one quasi-random point of the region (bounding box + rejection).
/// Advances the sampler state.
Vec sample_region(const Anisotropy& a, const Region& reg, LatticeSampler& lat, Rng& rng);

struct VolumeEstimate {
    double value = 0;
    double std_error = 0;
};

/// Monte Carlo volume of a region from bounding-box hit counting.
VolumeEstimate mc_volume(const Anisotropy& a, const Region& reg, uint64_t samples, uint64_t seed);

// ---------------------------------------------------------------------------
// The dilation constant.

/// Smallest natural number C such that (with x = 0, r = 1; both sides are
/// equivariant under T_beta so this covers all r > 0):
///   Theta_{sqrt(n)}  subset  E_{C,1}
///   E_{2^{-C},1}     subset  E_{1,1/4}
///   E_{l,1}          subset  E_{1,1/2}   with l = 2^{-C b_min / 2}
/// Certified by sampled inclusion checks with `samples` points per candidate.
/// Throws std::runtime_error if no candidate up to 64 works.
int frak_C(const Anisotropy& a, uint64_t samples = 1000000, uint64_t seed = 20240501);

struct RelationCheck {
    std::string name;
    InclusionReport report;
};

/// The six sampled inclusion relations between the region families, checked
/// over several random centers and scale parameters each:
///   1. E_{r,1}(x)        in  Theta_{r sqrt n}(x)
///   2. Theta_{r sqrt n}(x) in E_{rC,1}(x)
///   3. E_{2^{-C} r,1}(x) in  E_{r,1/4}(x)
///   4. R_{r,l}(x)        in  E_{(rl) n^{b_max/4},1}(x)   for r,l in (0,1)
///   5. E^max_{r/2,1}(x)  in  E^max_{r,1/2}(x)
///   6. E^max_{r,l}(x)    in  E^max_{rl,1}(x)             for l >= 1
/// C is the dilation constant frak_C.  `samples` is the per-relation budget.
std::vector<RelationCheck> fundamental_geometry_checks(const Anisotropy& a, int C,
                                                       uint64_t samples, uint64_t seed);

// ---------------------------------------------------------------------------
// Shells and topology bounds.

struct Shell {
    Ellipsoid outer;  // E_{r_k,1}(x)
    Ellipsoid inner;  // E_{r_{k+1},1}(x)
    double measure = 0;
};

/// Dyadic shells E_{r_k,1} \ E_{r_{k+1},1}, r_k = r0 2^{-k}, k = 0..K-1.
std::vector<Shell> shell_decomposition(const Anisotropy& a, const Vec& x, double r0, int K);

struct ThetaRadii {
    double inner = 0;  // B_inner  subset Theta_r
    double outer = 0;  // Theta_r  subset B_outer
};

/// Constructive Euclidean sandwich for the anisotropic ball; the bounds come
/// from per-coordinate norm comparisons, not from tight optimization.
ThetaRadii theta_euclid_sandwich(const Anisotropy& a, double r);

}  // namespace anlg
