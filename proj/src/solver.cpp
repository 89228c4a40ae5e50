#include "anlg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anlg/quadrature.hpp"

namespace anlg {

namespace {

// Multilinear read of a raw value buffer on the node box.  Mirrors
// GridFunction::eval but takes the buffer explicitly so the Jacobi sweep can
// read the previous iterate; corner weights sum to one exactly.
double interp(const GridFunction& g, const std::vector<double>& vals, const Vec& x) {
    std::array<int, kMaxDim> base{};
    std::array<double, kMaxDim> t{};
    for (int i = 0; i < g.n; ++i) {
        double u = (x[i] - g.lo[i]) / g.h[i];
        int b = static_cast<int>(std::floor(u));
        b = std::clamp(b, 0, g.dims[static_cast<size_t>(i)] - 2);
        base[static_cast<size_t>(i)] = b;
        t[static_cast<size_t>(i)] = std::clamp(u - b, 0.0, 1.0);
    }
    double acc = 0;
    const int corners = 1 << g.n;
    for (int cm = 0; cm < corners; ++cm) {
        double w = 1;
        std::array<int, kMaxDim> idx = base;
        for (int i = 0; i < g.n; ++i) {
            if (cm & (1 << i)) {
                w *= t[static_cast<size_t>(i)];
                idx[static_cast<size_t>(i)] += 1;
            } else {
                w *= 1.0 - t[static_cast<size_t>(i)];
            }
        }
        if (w != 0.0) acc += w * vals[g.flat(idx)];
    }
    return acc;
}

// Full stencil row applied to a value buffer: quadrature pairs (interior
// samples interpolated, exterior already folded into far_const), axis closure
// neighbors, plus far_const.  The diagonal term is not included.
double stencil_sum(const DiscreteOperator& op, const std::vector<double>& vals, size_t f) {
    const size_t m = op.offset_y.size();
    const Vec x = op.grid.node(f);
    const uint8_t* flags = &op.side_ext[f * m];
    double acc = op.far_const[f];
    for (size_t o = 0; o < m; ++o) {
        const double a = op.offset_a[o];
        if (!(flags[o] & 1)) acc += a * interp(op.grid, vals, x + op.offset_y[o]);
        if (!(flags[o] & 2)) acc += a * interp(op.grid, vals, x - op.offset_y[o]);
    }
    auto idx = op.grid.unflat(f);
    for (int i = 0; i < op.grid.n; ++i) {
        const size_t si = static_cast<size_t>(i);
        if (idx[si] + 1 < op.grid.dims[si]) {
            auto j = idx;
            ++j[si];
            acc += op.near_a[si] * vals[op.grid.flat(j)];
        }
        if (idx[si] > 0) {
            auto j = idx;
            --j[si];
            acc += op.near_a[si] * vals[op.grid.flat(j)];
        }
    }
    return acc;
}

}  // namespace

DiscreteOperator assemble(const GridFunction& domain, std::function<double(const Vec&)> g,
                          const KernelSpec& kernel, const QuadratureScheme& quad) {
    const Anisotropy& a = kernel.a;
    if (domain.n != a.n) throw std::invalid_argument("assemble: dimension mismatch");
    if (kernel.mode == KernelMode::Truncated)
        throw std::invalid_argument("assemble: L1 kernel perturbations have no monotone stencil");
    if (!g) throw std::invalid_argument("assemble: exterior data required");

    DiscreteOperator op;
    op.grid = domain;
    op.grid.values.assign(domain.size(), 0.0);
    op.grid.exterior_const = 0;
    op.grid.exterior_fn = nullptr;
    op.kernel = kernel;
    op.g = std::move(g);

    // The inner ellipsoid spans r^{2/b_i} along axis i.  The default core
    // spans two cells per axis; anything under one cell is unresolvable.
    double r_floor = 0, r_default = 0;
    for (int i = 0; i < a.n; ++i) {
        const double hi = domain.h[i];
        r_floor = std::max(r_floor, std::pow(hi, a.bi(i) / 2.0));
        r_default = std::max(r_default, std::pow(2.0 * hi, a.bi(i) / 2.0));
    }
    op.r_in = quad.r_in > 0 ? quad.r_in : r_default;
    if (op.r_in < r_floor) throw std::invalid_argument("assemble: r_in below grid resolution");

    double r_out = quad.r_out;
    if (r_out <= 0) {
        // Truncation so the dropped kernel tail stays under 1e-10 absolute,
        // capped so mapped coordinates stay comfortably inside double range.
        const double cap = kernel.mode == KernelMode::Reference ? 1.0 : kernel.Lambda;
        const double tail_budget = 1e-10;
        r_out = std::pow(cap * a.q_max_s * a.c * theta_unit_volume(a) / (a.s * tail_budget),
                         1.0 / a.s);
        r_out = std::min(r_out, 1e60);
    }
    r_out = std::max(r_out, 4.0 * op.r_in);
    int shells = static_cast<int>(std::ceil(std::log2(r_out / op.r_in)));
    op.shells = std::clamp(shells, 1, 512);
    op.r_out = op.r_in * std::pow(2.0, op.shells);

    const int radial = quad.radial_order > 0 ? quad.radial_order : 8;
    const int angular = quad.angular_order > 0 ? quad.angular_order : 8;
    const AnnulusRule rule = make_annulus_rule(a, radial, angular);

    op.offset_y.reserve(static_cast<size_t>(op.shells) * rule.nodes.size());
    op.offset_a.reserve(op.offset_y.capacity());
    for (int sh = 0; sh < op.shells; ++sh) {
        const double rho = op.r_in * std::pow(2.0, sh);
        // rho^c (shell Jacobian) times K0(rho z) collapses to rho^{-s} z^{-(c+s)},
        // which keeps every factor finite even for huge truncation radii.
        const double srho = std::pow(rho, -a.s);
        const ScalingMap map = t_beta(rho);
        for (const AnnulusNode& nd : rule.nodes) {
            const Vec y = map_apply(a, map, nd.z);
            double mult = 1.0;
            if (kernel.mode == KernelMode::Bounded) mult = kernel.multiplier(y);
            const double aw =
                0.5 * nd.w * a.q_max_s * mult * srho * std::pow(nd.rho, -(a.c + a.s));
            if (!(aw > 0) || !std::isfinite(aw)) continue;
            op.offset_y.push_back(y);
            op.offset_a.push_back(aw);
        }
    }

    const KernelMoments mom = kernel_moments(a, rule);
    for (int i = 0; i < a.n; ++i) {
        double mult = 1.0;
        if (kernel.mode == KernelMode::Bounded) {
            // Freeze the multiplier at the mid-core axis point; the closure is
            // already a quadratic model, so a frozen multiplier costs nothing
            // extra in order.
            Vec p = zero_vec(a.n);
            p[i] = std::pow(op.r_in / 2.0, 2.0 / a.bi(i));
            mult = kernel.multiplier(p);
        }
        const double Ii = inner_moment(a, mom, i, op.r_in);
        op.near_a[static_cast<size_t>(i)] = 0.5 * a.q_max_s * mult * Ii / sq(domain.h[i]);
    }

    double diag = 0;
    for (double aw : op.offset_a) diag += 2.0 * aw;
    for (int i = 0; i < a.n; ++i) diag += 2.0 * op.near_a[static_cast<size_t>(i)];
    op.diag = diag;

    const size_t nodes = domain.size();
    const size_t m = op.offset_y.size();
    op.far_const.assign(nodes, 0.0);
    op.ext_mass.assign(nodes, 0.0);
    op.side_ext.assign(nodes * m, 0);

    parallel_for_each(nodes, [&](size_t f) {
        const Vec x = op.grid.node(f);
        uint8_t* flags = &op.side_ext[f * m];
        double fc = 0, em = 0;
        for (size_t o = 0; o < m; ++o) {
            const double aw = op.offset_a[o];
            const Vec yp = x + op.offset_y[o];
            const Vec ym = x - op.offset_y[o];
            uint8_t fl = 0;
            if (!op.grid.inside(yp)) {
                fl |= 1;
                fc += aw * op.g(yp);
                em += aw;
            }
            if (!op.grid.inside(ym)) {
                fl |= 2;
                fc += aw * op.g(ym);
                em += aw;
            }
            flags[o] = fl;
        }
        // Closure neighbors beyond the box read the exterior data too.
        const auto idx = op.grid.unflat(f);
        for (int i = 0; i < op.grid.n; ++i) {
            const size_t si = static_cast<size_t>(i);
            if (idx[si] + 1 >= op.grid.dims[si]) {
                Vec p = x;
                p[i] += op.grid.h[i];
                fc += op.near_a[si] * op.g(p);
                em += op.near_a[si];
            }
            if (idx[si] == 0) {
                Vec p = x;
                p[i] -= op.grid.h[i];
                fc += op.near_a[si] * op.g(p);
                em += op.near_a[si];
            }
        }
        op.far_const[f] = fc;
        op.ext_mass[f] = em;
    });
    return op;
}

std::vector<double> apply_operator(const DiscreteOperator& op, const std::vector<double>& values) {
    if (values.size() != op.nodes()) throw std::invalid_argument("apply_operator: size mismatch");
    std::vector<double> out(op.nodes(), 0.0);
    parallel_for_each(op.nodes(), [&](size_t f) {
        out[f] = stencil_sum(op, values, f) - op.diag * values[f];
    });
    return out;
}

SolveReport solve(const DiscreteOperator& op, const SolveOptions& opt) {
    const size_t nodes = op.nodes();
    if (opt.max_iter < 1) throw std::invalid_argument("solve: max_iter must be positive");
    if (!(op.diag > 0)) throw std::invalid_argument("solve: empty stencil");

    std::vector<double> u(nodes, 0.0);
    if (!opt.initial.empty()) {
        if (opt.initial.size() != nodes) throw std::invalid_argument("solve: initial size mismatch");
        u = opt.initial;
    } else {
        // Exterior-mass average: already exact for constant data, and a warm
        // start otherwise.
        for (size_t f = 0; f < nodes; ++f)
            u[f] = op.ext_mass[f] > 0 ? op.far_const[f] / op.ext_mass[f] : 0.0;
    }

    SolveReport rep;
    rep.damping_used = opt.damping;
    std::vector<double> next(nodes, 0.0);
    std::vector<double> local(nodes, 0.0);
    double damping = opt.damping;
    double prev_resid = std::numeric_limits<double>::infinity();
    int stalled = 0;

    for (long it = 1; it <= opt.max_iter; ++it) {
        parallel_for_each(nodes, [&](size_t f) { local[f] = stencil_sum(op, u, f); });
        double resid = 0;
        for (size_t f = 0; f < nodes; ++f)
            resid = std::max(resid, std::fabs(local[f] - op.diag * u[f]));
        rep.iterations = it;
        rep.residual = resid;
        if (resid <= opt.tol) {
            rep.converged = true;
            break;
        }
        // The sweep is a max-norm contraction whenever every row keeps
        // exterior mass; if the residual stops improving anyway, retreat to
        // half steps once and keep going.
        if (resid >= prev_resid) {
            if (++stalled >= 20 && damping == opt.damping && damping > 0.5) {
                damping = 0.5;
                rep.damping_used = damping;
                stalled = 0;
            }
        } else {
            stalled = 0;
        }
        prev_resid = resid;
        for (size_t f = 0; f < nodes; ++f)
            next[f] = (1.0 - damping) * u[f] + damping * (local[f] / op.diag);
        u.swap(next);
    }

    rep.solution = op.grid;
    rep.solution.values = std::move(u);
    rep.solution.exterior_fn = op.g;
    rep.min_value = rep.solution.min_value();
    rep.max_value = rep.solution.max_value();
    return rep;
}

bool comparison_check(const SolveReport& u1, const SolveReport& u2, double tol) {
    const GridFunction& A = u1.solution;
    const GridFunction& B = u2.solution;
    if (A.n != B.n || A.dims != B.dims)
        throw std::invalid_argument("comparison_check: geometry mismatch");
    for (int i = 0; i < A.n; ++i)
        if (A.lo[i] != B.lo[i] || A.h[i] != B.h[i])
            throw std::invalid_argument("comparison_check: geometry mismatch");
    for (size_t f = 0; f < A.values.size(); ++f)
        if (A.values[f] < B.values[f] - tol) return false;
    return true;
}

}  // namespace anlg
