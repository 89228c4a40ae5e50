#pragma once

#include "anlg/grid_function.hpp"
#include "anlg/quadrature.hpp"

namespace anlg {

// ---------------------------------------------------------------------------
// Monotone discretization of L u = 0 in a box with prescribed exterior data.
//
// Every node shares one quadrature offset table: the reference annulus rule
// transported over dyadic shells [r_in, r_out].  An offset y stands for the
// symmetric pair, contributing a [u(x+y) + u(x-y) - 2 u(x)], a = w K(y) / 2.
// Samples landing inside the box couple to grid values by multilinear
// interpolation (weights sum to one, so constants are exact); samples outside
// are evaluated on the exterior data g once, at assembly, into far_const.
// The core |y|_b < r_in is closed by the local quadratic model: second
// differences along the axes weighted by the exact kernel moments over the
// inner ellipsoid, which keeps consistency O(h^2) and all weights positive.
// The row mass beyond the box makes the Jacobi sweep a strict max-norm
// contraction, so the fixed point exists and is unique.

struct DiscreteOperator {
    GridFunction grid;   // node geometry; values are not used
    KernelSpec kernel;
    std::function<double(const Vec&)> g;
    double r_in = 0;
    double r_out = 0;
    int shells = 0;

    std::vector<Vec> offset_y;
    std::vector<double> offset_a;
    std::array<double, kMaxDim> near_a{};  // axis closure weight a_i = q m_i I_i / (2 h_i^2)

    double diag = 0;                 // total row mass, node independent
    std::vector<double> far_const;   // per node: sum over exterior samples of a g
    std::vector<double> ext_mass;    // per node: mass sent to the exterior
    // Per node x offset flags: bit 0 = x + y exterior, bit 1 = x - y exterior.
    std::vector<uint8_t> side_ext;

    size_t nodes() const { return far_const.size(); }
};

/// Builds the discrete operator on the node box of `domain` (values ignored).
/// Zeros in the scheme resolve automatically: r_in to the smallest core the
/// grid can support, r_out from the kernel tail so the truncation error is
/// below 1e-10.  Throws when a requested r_in is below grid resolution or the
/// kernel carries an L1 perturbation (not representable in a monotone stencil).
DiscreteOperator assemble(const GridFunction& domain, std::function<double(const Vec&)> g,
                          const KernelSpec& kernel, const QuadratureScheme& quad = {});

/// L_h applied to a value vector (exterior handled through far_const / g).
std::vector<double> apply_operator(const DiscreteOperator& op, const std::vector<double>& values);

struct SolveOptions {
    double tol = 1e-8;       // max-norm residual of L_h u
    long max_iter = 100000;
    double damping = 1.0;    // falls back to 0.5 if sweeps stop contracting
    std::vector<double> initial;  // empty: start from the exterior average
};

struct SolveReport {
    GridFunction solution;   // exterior rule = g
    long iterations = 0;
    double residual = 0;
    bool converged = false;
    double min_value = 0;
    double max_value = 0;
    double damping_used = 1.0;
};

SolveReport solve(const DiscreteOperator& op, const SolveOptions& opt = {});

/// Discrete comparison: u1 >= u2 - tol on every node.  Requires identical
/// node geometry.
bool comparison_check(const SolveReport& u1, const SolveReport& u2, double tol = 1e-10);

}  // namespace anlg
