#pragma once

#include "anlg/nonlocal.hpp"
#include "anlg/solver.hpp"

namespace anlg {

// ---------------------------------------------------------------------------
// Empirical regularity checks on solved (or synthetic) grid functions: every
// qualitative statement becomes a measured ladder with a log-log fit, and
// every constant is reported per instance instead of asserted globally.

/// Ladder of (scale, value) pairs with a least-squares fit of
/// log value = a + exponent * log scale over the entries with value > 0.
/// Scales are kept strictly decreasing; the residual is the rms misfit in
/// natural log.  Each producer documents its own pass rule.
struct DecayReport {
    std::vector<double> scales;
    std::vector<double> values;
    double exponent = 0;
    double residual = 0;
    int usable = 0;         // entries entering the fit
    bool pass = false;
    bool degenerate = false;  // all values at roundoff zero
};

/// Shared fit: sorts the ladder by decreasing scale, fits over positive
/// values, leaves `pass` false for the caller.  Throws on duplicate or
/// nonpositive scales or length mismatch.
DecayReport fit_decay(std::vector<double> scales, std::vector<double> values);

// ---------------------------------------------------------------------------
// Oscillation decay over shrinking E^max ellipsoids.

struct DeGiorgiOptions {
    int num_scales = 8;        // r_k = r0 2^{-k}, k = 0 .. num_scales-1
    double residual_tol = 0.1;
    double zero_tol = 1e-13;   // relative: osc below this times scale is zero
};

/// osc of u over E^max_{r_k,1}(x0) on grid nodes, halving r_k.  Scales with
/// fewer than two nodes are dropped; fewer than four usable scales throws.
/// pass: fitted exponent > 0 with fit residual below residual_tol.  Constant
/// data sets `degenerate` and passes vacuously.
DecayReport de_giorgi_iteration(const GridFunction& u, const Anisotropy& a, const Vec& x0,
                                double r0, const DeGiorgiOptions& opt = {});

// ---------------------------------------------------------------------------
// Growth lemma: subsolution bounded by 1 in B_1 with a controlled tail and a
// fat zero set stays below 1 - mu on B_{1/2}.

struct GrowthOptions {
    double subsolution_tol = 1e-6;  // slack on M+ u >= 0 within error bars
    int subsolution_cap = 24;       // nodes certified inside B_1
    int tail_samples = 4096;        // annulus samples for the tail hypothesis
    double tail_radius = 16;        // tail checked on 1 < |x| <= tail_radius
    uint64_t seed = 7;
    OperatorOptions op;
};

struct GrowthReport {
    // Hypotheses, in order: (1) M+ u >= 0 at checked nodes of B_1,
    // (2) u <= 1 in B_1, (3) u(x) <= 2|2x|^tau - 1 outside B_1,
    // (4) |{u <= 0} cap B_1| > delta.  Margins are signed, >= 0 when satisfied.
    std::array<double, 4> hypothesis_margin{};
    int failed_hypothesis = 0;  // first failed, 1..4; 0 = all hold
    bool hypotheses_ok = false;
    double zero_measure = 0;    // node measure of {u <= 0} cap B_1
    double max_half = 0;        // max over grid nodes of closed B_{1/2}
    double margin = 0;          // 1 - max_half
    bool holds = false;         // hypotheses_ok and max_half <= 1 - mu_candidate
};

/// The grid box must cover [-1,1]^n.  tau is shared with the barrier
/// machinery (take it from find_kappa_tau for the same anisotropy).
GrowthReport growth_lemma_check(const GridFunction& u, const KernelSpec& k, double delta,
                                double mu_candidate, double tau, const GrowthOptions& opt = {});

// ---------------------------------------------------------------------------
// Harnack quotient of a solved nonnegative-data instance.

struct HarnackOptions {
    int nodes = 25;      // per axis; odd keeps the center on a node
    double half = 1.0;   // solve box [-half, half]^n
    QuadratureScheme quad;
    SolveOptions solve;
    double clamp = 1e-12;
};

struct HarnackReport {
    GridFunction u;
    double sup_half = 0;   // over grid nodes with |x| <= 1/2
    double inf_half = 0;
    double center = 0;     // u(0)
    double residual = 0;   // solver residual, the C_0 of the normalized bound
    double ratio = 0;      // sup / max(inf, clamp)
    double normalized = 0;  // sup / (u(0) + residual)
    bool inf_clamped = false;
    bool converged = false;
};

/// Solves L u = 0 on the box with exterior data g >= 0 and measures the
/// quotient over B_{1/2}.  A numerically nonpositive infimum is clamped and
/// flagged rather than treated as an error.
HarnackReport harnack_ratio(const std::function<double(const Vec&)>& g, const KernelSpec& k,
                            const HarnackOptions& opt = {});

// ---------------------------------------------------------------------------
// Distribution-function decay |{u >= t} cap B_1| over a threshold ladder.
// pass: at least three positive measures with fitted slope < 0.

DecayReport point_estimate_decay(const GridFunction& u, const std::vector<double>& thresholds);

// ---------------------------------------------------------------------------
// Liouville probe: bounded dipole data receding through a radius ladder;
// osc_{B_1} of the solved function should vanish like a power of R.
// pass: at least three positive oscillations with fitted slope < 0.

struct LiouvilleOptions {
    int nodes = 17;
    double half = 1.0;
    QuadratureScheme quad;
    SolveOptions solve;
};

DecayReport liouville_probe(const KernelSpec& k, const std::vector<double>& radii,
                            const LiouvilleOptions& opt = {});

// ---------------------------------------------------------------------------
// Hoelder exponent fits by envelope regression over sampled node pairs.

enum class HolderMetric { Aniso, Euclid };

struct HolderOptions {
    size_t pairs = 100000;
    int bins = 24;
    double quantile = 0.95;  // envelope level within each distance bin
    size_t min_bin = 50;     // bins with fewer samples are dropped
    double cap = 1.0;        // fitted exponent is clamped to [0, cap]
    uint64_t seed = 1234;
};

struct HolderReport {
    double exponent = 0;      // clamped envelope slope
    double exponent_raw = 0;  // unclamped slope
    double seminorm = 0;      // max |du| / dist^exponent over the sample
    double residual = 0;      // rms log misfit of the envelope line
    int bins_used = 0;
    bool degenerate = false;  // constant field
};

/// Pairs are drawn among grid nodes inside the Euclidean ball
/// B_radius(center); distances use the chosen metric.  Deterministic in
/// (seed, grid): reruns are bit-identical.
HolderReport holder_fit(const GridFunction& u, const Anisotropy& a, const Vec& center,
                        double radius, HolderMetric metric, const HolderOptions& opt = {});

/// Central-difference gradient on interior nodes, then the same envelope fit
/// on |grad u(x) - grad u(y)|.
HolderReport gradient_holder_fit(const GridFunction& u, const Anisotropy& a, const Vec& center,
                                 double radius, HolderMetric metric, const HolderOptions& opt = {});

}  // namespace anlg
