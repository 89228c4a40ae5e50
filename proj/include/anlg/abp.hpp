#pragma once

#include "anlg/envelope.hpp"
#include "anlg/nonlocal.hpp"

namespace anlg {

// ---------------------------------------------------------------------------
// Detachment sets.  Around a contact point x the rings
//   ring_k = E_{r_k,1}(x) \ E_{r_{k+1},1}(x),   r_k = r0 l^k,  l = 2^{-C b_min/2}
// carry the sets where u drops below the tangent plane of the envelope by more
// than the scale threshold M (q_min_s / q_max_s) r_k^{4/b_min}:
//   W_k(x) = ring_k  intersect  {y : u(x+y) < u(x) + <y, grad(x)> - threshold_k}.
// Both |W_k| and |ring_k| are measured by counting the same grid nodes, so the
// reported ratios are discretization consistent.

struct DetachmentOptions {
    double rho0 = 1.0;
    int frak_c = 0;      // <= 0: computed from the anisotropy
    int num_scales = 12;
    double c0 = 1.0;     // constant in the measure bound |W_k| <= c0 (f/M) |ring_k|
};

struct DetachmentReport {
    std::vector<double> radii;         // r_k
    std::vector<double> thresholds;    // M (q_min_s/q_max_s) r_k^{4/b_min}
    std::vector<double> w_measure;     // |W_k|
    std::vector<double> ring_measure;  // |ring_k|, by the same node counting
    int first_k = -1;                  // first k with |W_k| <= c0 (f/M)|ring_k|, -1 if none
    double l = 0;
    int frak_c = 0;
};

/// Requires x to coincide with a grid node inside the contact mask.
DetachmentReport detachment_sets(const GridFunction& u, const ConcaveEnvelope& env,
                                 const Vec& x, double big_m, double f_at_x,
                                 const Anisotropy& a, const DetachmentOptions& opt = {});

// ---------------------------------------------------------------------------
// The rectangle family.  B_1 is covered by a lattice tiling with full edges
// (rho0 2^{-1/q_min_s})^{2/b_i} / 2^C; tiles missing the contact set are
// dropped, the rest are tested and split per axis by 2^C until both measure
// properties hold:
//   (5)  |grad Gamma(closure R_j)|  <=  C5 (max_{comp_j} f+)^n |comp_j|
//   (6)  |{y in dilated comp_j : Gamma - u <= C6 (max_{comp_j} f+) dtilde^2}|
//            >=  varsigma |comp_j|
// comp_j is the concentric companion rectangle with half edges r_k^{2/b_i},
// r_k = r0 l^{g-1} for a generation-g tile, and the dilation factor is
// 1 + 2^{-(C+1)}.  C5, C6 <= 0 selects auto calibration: the constants are
// fitted on the initial contact tiles so that the first pass terminates, and
// the fitted values are reported.

struct FamilyOptions {
    double rho0 = 1.0;
    double eps1 = 0.5;       // slack in the default varsigma
    double c5 = -1;          // <= 0: auto calibrate
    double c6 = -1;          // <= 0: auto calibrate
    double varsigma = -1;    // <= 0: (1-eps1)(1-l^c) |B_1| / 2^n
    int max_depth = 8;
    int frak_c = 0;          // <= 0: computed from the anisotropy
    bool certify_supersolution = true;
    double supersolution_tol = 1e-6;
    int supersolution_cap = 32;   // contact nodes sampled for the M+ check
    OperatorOptions op;           // quadrature settings for that check
    EnvelopeOptions envelope;
};

struct FamilyRect {
    AnisoRect rect;        // open tile
    AnisoRect companion;
    int generation = 1;    // tile edges are E_i / 2^{C g}
    std::array<int64_t, kMaxDim> cell{};  // lattice index at its generation
    double diameter = 0;
    double companion_diameter = 0;
    double grad_image = 0;           // |grad Gamma(closure)|
    double max_f_plus = 0;           // max f+ over companion nodes
    double contact_fraction = 0;     // property (6) measure over |companion|
    bool pass5 = false;
    bool pass6 = false;
};

struct RectangleFamily {
    std::vector<FamilyRect> rects;
    ConcaveEnvelope envelope;
    std::vector<FamilyRect> offenders;  // still failing when the depth cap hit
    bool terminated = true;
    int depth = 1;             // deepest generation present
    double r0 = 0;             // rho0 2^{-1/q_min_s}
    double l = 0;
    int frak_c = 0;
    double c5 = 0, c6 = 0, varsigma = 0;  // effective constants
    double c_dilate = 0;
    double sup_u = 0;
    double supersolution_margin = 0;  // min over checked nodes of M+ u + f + err
    // Exact set arithmetic checks over the final family.
    bool disjoint = false;
    bool covers_contact = false;
    bool closures_meet_contact = false;
    bool diameter_bound = false;
};

RectangleFamily abp_rectangle_family(const GridFunction& u, const GridFunction& f,
                                     const KernelSpec& kernel, const FamilyOptions& opt = {});

// ---------------------------------------------------------------------------
// Volume consistency.  The construction chain bounds
//   omega_n (sup u / 4)^n  <=  C5 (max f+)^n (2^n/omega_n) overlap * |union E_j|
// where E_j = E_{r_j,1}(x_j) sits at a contact point of the j-th closure with
// the companion scale r_j, and overlap is the measured multiplicity of that
// ellipsoid family.  Reported as a consistency inequality for the instance.

struct VolumeConsistency {
    double sup_u = 0;
    double gradient_hull = 0;    // |conv grad Gamma(contact)|
    double plane_ball = 0;       // omega_n (sup u / 4)^n
    double union_volume = 0;     // |union E_{r_j,1}(x_j)|, grid counted
    int max_overlap = 0;
    double chain_constant = 0;   // C produced by the construction
    bool gradient_bound_ok = false;  // gradient_hull >= plane_ball (1 - tol)
    bool chain_ok = false;           // chain_constant (sup u)^n <= union_volume (1 + tol)
};

VolumeConsistency abp_volume_consistency(const RectangleFamily& fam, const GridFunction& u,
                                         const Anisotropy& a, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Growth covers.  Each point x carries a rectangle centered at x with half
// widths h(i, t_x); the greedy pass repeatedly keeps the largest-parameter
// uncovered point.  The maximum membership multiplicity is recorded.

struct GrowthCover {
    struct Entry {
        size_t point = 0;
        AnisoRect rect;
        double t = 0;
    };
    std::vector<Entry> rects;
    int max_overlap = 0;
};

GrowthCover cc_cover(const std::vector<Vec>& pts, const std::vector<double>& t,
                     const std::function<double(int, double)>& h);

// ---------------------------------------------------------------------------
// Anisotropic Calderon-Zygmund splitting of Q_1 = (-1/2,1/2)^n.  A generation
// m cell has per-axis half edges 2^{-k_i(m)} / 2 with k_i(m) = round(2 m / b_i),
// realizing the ratio 2^{-2m/b_i} with integer splits.  A cell is selected
// when its mask fraction exceeds the threshold and its parent's does not;
// cells with fraction in (0, threshold] recurse.  Fractions are node counts
// with half-open membership [lo, hi), so the children partition the parent
// exactly.  The predecessor is the concentric companion with half edges
// 2^{-C k b_min / b_i}, k = floor(min_i (k_i + 1) / C) - 1 clamped at 0.

struct CzNode {
    AnisoRect rect;
    AnisoRect predecessor;
    int generation = 0;
    std::array<int, kMaxDim> splits{};  // cumulative per-axis halvings k_i
    double fraction = 0;
};

struct CzDecomposition {
    std::vector<CzNode> selected;
    int max_generation = 0;
    size_t cells_visited = 0;
};

CzDecomposition cz_decompose(const GridFunction& mask, const Anisotropy& a, double threshold,
                             int frak_c = 0, int max_generations = 24);

}  // namespace anlg
