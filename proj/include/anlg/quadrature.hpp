#pragma once

#include "anlg/kernel.hpp"

namespace anlg {

/// Shell quadrature parameters for principal-value integrals.  Shells are
/// anisotropic annuli {rho < |y|_b <= 2 rho} running geometrically from r_in
/// out to r_out; zeros mean "resolve automatically from the integrand's
/// declared smoothness and the kernel tail".
struct QuadratureScheme {
    double r_in = 0;
    double r_out = 0;
    int radial_order = 8;
    int angular_order = 8;
    uint64_t seed = 0;
};

struct AnnulusNode {
    Vec z;
    double w;
    double rho;  // |z|_b, cached
};

/// Positive-weight rule on the reference annulus {1 < |z|_b <= 2}.  Built in
/// anisotropic polar coordinates y_i = sgn_i (rho^2 a_i)^{1/b_i} over the
/// probability simplex a, with per-corner power substitutions that remove the
/// Dirichlet-density endpoint singularities; smooth integrands then converge
/// spectrally in the panel orders (n <= 2; the n = 3 stick-breaking panels
/// keep one fractional-power corner and converge slower).
///
/// Every shell {u < |y|_b <= 2u} is the image of this annulus under
/// T_beta(u), with weights scaled by u^c.
struct AnnulusRule {
    std::vector<AnnulusNode> nodes;
    double measure = 0;  // sum of weights, equals |Theta_2| - |Theta_1|
};

AnnulusRule make_annulus_rule(const Anisotropy& a, int radial_order, int angular_order);

/// Kernel moments on the reference annulus, used for analytic near-field and
/// tail bounds:
///   A_shell = int_{Theta_2 \ Theta_1} K0,   J_i = int z_i^2 K0.
/// Dyadic scaling is exact per axis, so
///   int_{Theta_r} y_i^2 K0 dy = J_i r^{e_i} / (2^{e_i} - 1),  e_i = 4/b_i - s.
struct KernelMoments {
    double A_shell = 0;
    std::array<double, kMaxDim> J{};
};

KernelMoments kernel_moments(const Anisotropy& a, const AnnulusRule& rule);

double inner_moment(const Anisotropy& a, const KernelMoments& m, int axis, double r);
double inner_moment_sum(const Anisotropy& a, const KernelMoments& m, double r);

}  // namespace anlg
