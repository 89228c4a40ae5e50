#pragma once

#include "anlg/quadrature.hpp"

namespace anlg {

/// A function the operator can evaluate pointwise, with declared regularity
/// used for certified error bounds:
///   f       : global pointwise evaluation
///   M       : second-difference constant, |f(x+y)+f(x-y)-2f(x)| <= 2 M |y|^2
///             (Euclidean |y|) whenever |y| <= eta0
///   eta0    : radius on which the bound above is valid
///   sup_abs : global sup |f|; controls the far-field truncation error
struct EvaluableFunction {
    std::function<double(const Vec&)> f;
    double M = 1;
    double eta0 = 1;
    double sup_abs = 1;
    // Optional analytic second difference delta2(x, y) = f(x+y)+f(x-y)-2f(x).
    // The raw three-evaluation form loses absolute accuracy ~4 eps sup|f|,
    // which the singular kernel amplifies near the core; providing a
    // cancellation-free form removes that noise floor.
    std::function<double(const Vec&, const Vec&)> delta2;
};

double second_difference(const EvaluableFunction& u, const Vec& x, const Vec& y);

/// Operator value with a certified error split.  The reported bracket is
/// [value - total_err, value + total_err]:
///   err_quad : embedded lower-order estimate of the shell quadrature error
///   err_near : analytic bound for the omitted core Theta_{r_in}, from the
///              declared second-difference constant and exact core moments
///   err_far  : analytic kernel-tail bound outside the last shell; truncated
///              kernels add 2 sup|u| c1 for the L1 perturbation, which enters
///              through its budget only and is never sampled
struct OperatorValue {
    double value = 0;
    double err_quad = 0;
    double err_near = 0;
    double err_far = 0;
    double r_in = 0;
    double r_out = 0;
    int shells = 0;
    double total_err() const { return err_quad + err_near + err_far; }
};

struct OperatorOptions {
    QuadratureScheme quad;        // zeros resolve automatically
    double target_error = 1e-7;   // drives r_in shrinking and tail extension
};

/// L u(x) = 1/2 int [u(x+y) + u(x-y) - 2 u(x)] K(y) dy, evaluated over dyadic
/// anisotropic shells.  Each shell is the T_beta image of one reference
/// annulus rule, so a single node table serves every scale.
OperatorValue evaluate_L(const KernelSpec& k, const EvaluableFunction& u, const Vec& x,
                         const OperatorOptions& opts = {});

/// Extremal values over the bounded kernel class m in [lambda, Lambda]:
///   plus  = 1/2 q_max_s int (Lambda delta^+ - lambda delta^-) K0
///   minus = 1/2 q_max_s int (lambda delta^+ - Lambda delta^-) K0
/// computed in one pass since they share every second difference.
struct PucciPair {
    OperatorValue plus;
    OperatorValue minus;
};

PucciPair evaluate_pucci(const Anisotropy& a, double lambda, double Lambda,
                         const EvaluableFunction& u, const Vec& x,
                         const OperatorOptions& opts = {});

}  // namespace anlg
