#pragma once

#include "anlg/nonlocal.hpp"

namespace anlg {

// ---------------------------------------------------------------------------
// Radial bump eta(y) = (1-|y|^2)^2 on B_1, zero outside.  Globally C^{1,1}
// with |D^2 eta| <= 8 (value and gradient vanish on the glue sphere).

double eta_value(const Vec& x);
EvaluableFunction eta_barrier(int n);

// ---------------------------------------------------------------------------
// Radial power barrier f(x) = min(kappa^{-p}, |x|^{-p}); the branch switch
// sits at |x| = kappa.  For suitable p it satisfies M^- f >= 0 on the annulus
// 1 <= |x| <= R.  The scaled variant g = f o T_beta(r)^{-1} transfers the
// certificate to the ellipsoidal annulus E_{r,R} \ E_{r,1}.

double power_barrier_value(double p, double kappa, const Vec& x);
EvaluableFunction power_barrier(double p, double kappa);
EvaluableFunction scaled_power_barrier(const Anisotropy& a, double p, double kappa, double r);

struct PowerBarrierReport {
    bool found = false;
    double p = 0;
    double kappa = 0.5;
    double min_minus = 0;  // worst grid value of M^- f minus its error bar
    int iterations = 0;
    std::vector<Vec> grid;
};

/// Doubles p until M^- f clears zero on a geometric radial grid times a
/// direction set covering 1 <= |x| <= R.  Existence holds for s above an
/// R-dependent threshold, so failure is reported, never asserted away.
PowerBarrierReport find_p(const Anisotropy& a, double lambda, double Lambda, double R,
                          int radial_pts = 5, int angular_pts = 8, double p0 = 2,
                          int iteration_cap = 60);

// ---------------------------------------------------------------------------
// Bump Psi: zero outside E_{1/4,3sqrt(n)}, the shifted power profile
// |T_{beta,1/4}^{-1} x|^{-p} - (3 sqrt n)^{-p} in the middle, and a quadratic
// cap inside E_{1/4,1}, all scaled by c_tilde.  In the transformed coordinate
// z = T^{-1}x the middle profile is radial and the cap A - (p/2)|z|^2 matches
// value and gradient on the whole sphere |z| = 1, which pins the per-axis
// coefficients kappa_i = (p/2) 4^{4/b_i} exactly.
//
// c_tilde is calibrated so Psi > 3 on the open rectangle R_{1/4,3}; the
// rectangle corner has |z| = sqrt(n) 3^{2/b_min}, which lies inside the
// support only when b_min > 2.  Otherwise no calibration exists and the
// report says so.

struct BumpPsi {
    Anisotropy a;
    double p = 0;
    double c_tilde = 0;
    double cap_A = 0;  // pre-c_tilde cap value at z = 0
    std::array<double, kMaxDim> cap_kappa{};
    bool feasible = false;
    double corner_z = 0;  // |z| at the rectangle corner, vs support radius 3 sqrt n
};

BumpPsi make_bump_psi(const Anisotropy& a, double p);
double bump_value(const BumpPsi& psi, const Vec& x);
EvaluableFunction bump_function(const BumpPsi& psi);

// ---------------------------------------------------------------------------
// Fundamental smallness estimate for eta: for given delta there are kappa,
// tau with
//   kappa sup_{B_{3/4}} (-L eta) + 2 int_{|y|>1/4} (|8y|^tau - 1) K0
//     < 1/2 inf_{|B| = delta, B in B_2} int_B K0.
// The left side shrinks linearly in kappa and monotonically in tau, so the
// halving search below always terminates on a true statement.

struct TailIntegral {
    double value = 0;
    double err_quad = 0;
    double tail_bound = 0;  // analytic bound outside the last shell
    int shells = 0;
};

/// 2 int_{|y| > 1/4} (|8y|^tau - 1) K0(y) dy by shell quadrature with the
/// Euclidean indicator applied nodewise.  Requires tau < s b_min / 2 for the
/// tail to converge.
TailIntegral eta_tail_integral(const Anisotropy& a, double tau, int radial_order = 10,
                               int angular_order = 10);

struct SilvestreResult {
    double kappa = 0;
    double tau = 0;
    double eta_sup = 0;  // sup over the grid of (-Delta)^{beta,s} eta
    double eta_err = 0;
    double tail_value = 0;
    double tail_err = 0;
    double lhs = 0;  // kappa-weighted sup + tail, errors included
    double rhs = 0;  // half the bathtub infimum
    double margin = 0;
    int grid = 0;
    int bathtub_resolution = 0;
};

SilvestreResult silvestre_check(const Anisotropy& a, double delta, double kappa, double tau,
                                int grid = 7, int bathtub_resolution = 201);

struct SilvestreCertificate {
    bool certified = false;
    int iterations = 0;
    SilvestreResult last;
};

SilvestreCertificate find_kappa_tau(const Anisotropy& a, double delta, int grid = 7,
                                    int bathtub_resolution = 201, int iteration_cap = 60);

}  // namespace anlg
