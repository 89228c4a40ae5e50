#pragma once

#include "anlg/regions.hpp"

namespace anlg {

/// Kernel modes:
///   Reference : K(y) = q_max_s * K0(y),  K0(y) = |y|_b^{-(c+s)}
///   Bounded   : K(y) = m(y) * q_max_s * K0(y)  with  lambda <= m <= Lambda
///   Truncated : bounded part plus an L1 perturbation K2, |K2|_{L1} <= c1
/// The reference prefactor convention is C_{b,s} = q_max_s throughout.
enum class KernelMode { Reference, Bounded, Truncated };

struct KernelSpec {
    Anisotropy a;
    KernelMode mode = KernelMode::Reference;
    double lambda = 1;
    double Lambda = 1;
    std::function<double(const Vec&)> multiplier;  // bounded/truncated modes
    std::function<double(const Vec&)> l1_tail;     // truncated mode only
    double c1 = 0;                                 // declared L1 bound of l1_tail
};

KernelSpec reference_kernel(const Anisotropy& a);
KernelSpec bounded_kernel(const Anisotropy& a, double lambda, double Lambda,
                          std::function<double(const Vec&)> multiplier);

/// Bare kernel K0(y) = |y|_b^{-(c+s)}.  Throws std::domain_error at y = 0.
double eval_K0(const Anisotropy& a, const Vec& y);

/// Kernel value including mode handling.  Symmetric in y <-> -y by
/// construction when the multiplier is (checked for builtins, trusted for
/// user callables).
double kernel_eval(const KernelSpec& k, const Vec& y);

/// Value given a precomputed anisotropic norm, avoiding a second norm
/// computation in quadrature loops.
double kernel_eval_with_norm(const KernelSpec& k, const Vec& y, double norm);

// ---------------------------------------------------------------------------
// Bathtub infimum:  inf over sets S subset B_2, |S| = delta, of  int_S K0.
// Realized on a uniform cell grid over [-2,2]^n by accumulating cells in
// ascending K0 order up to measure exactly delta (partial last cell).

struct BathtubResult {
    double value = 0;
    double delta = 0;
    int resolution = 0;          // cells per axis over [-2,2]^n
    double cell_measure = 0;
    std::vector<uint8_t> mask;   // 1 = cell fully selected, row-major
    bool capped = false;         // delta exceeded the representable measure
    bool singular_excluded = false;  // the origin cell was left out
};

BathtubResult bathtub_infimum(const Anisotropy& a, double delta, int resolution);

// ---------------------------------------------------------------------------
// Translation modulus:  int_{|y| > tau0} |K(y) - K(y - h)| / |h| dy,
// integrated in Euclidean polar blocks with an analytic tail bound added.

struct TranslationModulus {
    double value = 0;       // quadrature part + tail bound
    double quadrature = 0;
    double tail_bound = 0;
    int blocks = 0;
};

struct TranslationOptions {
    int radial_order = 12;
    int angular_order = 12;
    double rel_tol = 1e-9;
    int max_blocks = 400;
};

/// Requires 0 < |h| < tau0 / 2.
TranslationModulus translation_modulus(const KernelSpec& k, const Vec& h, double tau0,
                                       const TranslationOptions& opts = {});

/// Closed-form bare-kernel tail:
///   int_{|y|_b > rho} K0 dy = c |Theta_1| rho^{-s} / s.
double k0_tail_mass(const Anisotropy& a, double rho);

}  // namespace anlg
