#include "anlg/nonlocal.hpp"

#include <cmath>
#include <limits>

namespace anlg {

double second_difference(const EvaluableFunction& u, const Vec& x, const Vec& y) {
    if (u.delta2) return u.delta2(x, y);
    return u.f(x + y) + u.f(x - y) - 2.0 * u.f(x);
}

namespace {

struct ShellSums {
    double hi_plus = 0, hi_minus = 0;
    double lo_plus = 0, lo_minus = 0;
    double lo2_plus = 0, lo2_minus = 0;
};

// Evaluates one shell {u_k < |y|_b <= 2 u_k} by transporting the reference
// annulus rule: y_i = u_k^{2/b_i} z_i, weight w u_k^c, norm u_k rho_hat.
// plus/minus carry the two Pucci integrands; for plain L both equal the
// kernel integrand and only plus is consumed.
template <typename Integrand>
void accumulate_shell(const Anisotropy& a, const AnnulusRule& rule, double uk,
                      const EvaluableFunction& u, const Vec& x, const Integrand& g,
                      double& out_plus, double& out_minus) {
    const int n = a.n;
    std::array<double, kMaxDim> fac{};
    for (int i = 0; i < n; ++i) fac[static_cast<size_t>(i)] = std::pow(uk, 2.0 / a.bi(i));
    double wscale = std::pow(uk, a.c);
    double sp = 0, sm = 0, cp = 0, cm = 0;  // Kahan pairs
    for (const auto& node : rule.nodes) {
        Vec y = zero_vec(n);
        for (int i = 0; i < n; ++i) y[i] = fac[static_cast<size_t>(i)] * node.z[i];
        double rho = uk * node.rho;
        double k0 = std::pow(rho, -(a.c + a.s));
        double delta = second_difference(u, x, y);
        double gp, gm;
        g(y, delta, k0, gp, gm);
        double tp = node.w * wscale * gp - cp;
        double t1 = sp + tp;
        cp = (t1 - sp) - tp;
        sp = t1;
        double tm = node.w * wscale * gm - cm;
        double t2 = sm + tm;
        cm = (t2 - sm) - tm;
        sm = t2;
    }
    out_plus = sp;
    out_minus = sm;
}

struct ResolvedScheme {
    double r_in;
    int shells;
    double err_near;
    double err_far;
};

// r_in must keep Theta_{r_in} inside the Euclidean eta0-ball (so the declared
// second-difference bound applies) and make the analytic core bound small;
// the shell count extends until the tail bound clears its share of the
// target.  Explicit r_in / r_out in the scheme override both.
ResolvedScheme resolve_scheme(const Anisotropy& a, const KernelMoments& mom, double bound_factor,
                              const EvaluableFunction& u, const OperatorOptions& opts,
                              double extra_far) {
    ResolvedScheme rs{};
    double target = opts.target_error;
    // Raw three-evaluation second differences sit on a roundoff floor of a
    // few ulps of sup|u|, which the accumulated kernel mass amplifies as the
    // core shrinks; past the balance point a smaller r_in only trades the
    // analytic core bound for noise.  The floor is zero when the caller
    // supplies a cancellation-free second difference.
    double noise = u.delta2 ? 0.0
                            : 8.0 * std::numeric_limits<double>::epsilon() * u.sup_abs;
    double r_in = opts.quad.r_in;
    if (r_in <= 0) {
        double r_cap = 0.5;
        if (theta_euclid_sandwich(a, r_cap).outer > u.eta0) {
            double lo = 0, hi = r_cap;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                (theta_euclid_sandwich(a, mid).outer > u.eta0 ? hi : lo) = mid;
            }
            r_cap = lo;
        }
        r_in = r_cap;
        // Core bound <= M F S r^{e_min} for r <= 1 with e_min = q_max_s;
        // invert in closed form, then clamp against underflow.
        double S = 0;
        for (int i = 0; i < a.n; ++i) {
            double e = 4.0 / a.bi(i) - a.s;
            S += mom.J[static_cast<size_t>(i)] / (std::pow(2.0, e) - 1.0);
        }
        double need = target / (3.0 * std::max(u.M * bound_factor * S, 1e-300));
        if (need < 1.0) {
            double cand = std::pow(need, 1.0 / a.q_max_s);
            r_in = std::max(std::min(r_in, cand), 1e-18);
        }
        if (noise > 0) {
            auto bound = [&](double r) {
                return u.M * inner_moment_sum(a, mom, r) + 0.5 * noise * k0_tail_mass(a, r);
            };
            while (2.0 * r_in <= r_cap && bound(2.0 * r_in) < bound(r_in)) r_in *= 2.0;
        }
    }
    rs.r_in = r_in;
    rs.err_near = u.M * bound_factor * inner_moment_sum(a, mom, r_in) +
                  0.5 * bound_factor * noise * k0_tail_mass(a, r_in);

    double tail_cap = opts.quad.r_out > 0 ? opts.quad.r_out
                                          : std::numeric_limits<double>::infinity();
    int shells = 0;
    double R = r_in;
    while (true) {
        double tail = 2.0 * u.sup_abs * bound_factor * k0_tail_mass(a, R);
        if (shells > 0 && (tail <= target / 3.0 || R >= tail_cap || shells >= 400)) {
            rs.err_far = tail + extra_far;
            break;
        }
        R *= 2.0;
        ++shells;
    }
    rs.shells = shells;
    return rs;
}

// Shared driver: shells are evaluated with the requested rule and twice more
// with embedded lower-order rules.  The summed per-shell gaps estimate the
// quadrature error; two gaps because adjacent-order rules can agree by
// coincidence while both are still far off.
template <typename Integrand>
void run_shells(const Anisotropy& a, const EvaluableFunction& u, const Vec& x,
                const OperatorOptions& opts, const ResolvedScheme& rs, const Integrand& g,
                OperatorValue& plus, OperatorValue& minus) {
    int ro = opts.quad.radial_order, ao = opts.quad.angular_order;
    AnnulusRule hi = make_annulus_rule(a, ro, ao);
    AnnulusRule lo = make_annulus_rule(a, std::max(2, ro - 2), std::max(2, ao - 2));
    AnnulusRule lo2 = make_annulus_rule(a, std::max(2, ro - 4), std::max(2, ao - 4));

    std::vector<ShellSums> sums(static_cast<size_t>(rs.shells));
    parallel_for(static_cast<size_t>(rs.shells), [&](size_t s0, size_t s1) {
        for (size_t k = s0; k < s1; ++k) {
            double uk = rs.r_in * std::pow(2.0, static_cast<double>(k));
            ShellSums& ss = sums[k];
            accumulate_shell(a, hi, uk, u, x, g, ss.hi_plus, ss.hi_minus);
            accumulate_shell(a, lo, uk, u, x, g, ss.lo_plus, ss.lo_minus);
            accumulate_shell(a, lo2, uk, u, x, g, ss.lo2_plus, ss.lo2_minus);
        }
    });

    double vp = 0, vm = 0, qp = 0, qm = 0;
    for (const auto& ss : sums) {
        vp += ss.hi_plus;
        vm += ss.hi_minus;
        qp += std::max(std::fabs(ss.hi_plus - ss.lo_plus),
                       0.5 * std::fabs(ss.lo_plus - ss.lo2_plus));
        qm += std::max(std::fabs(ss.hi_minus - ss.lo_minus),
                       0.5 * std::fabs(ss.lo_minus - ss.lo2_minus));
    }
    double r_out = rs.r_in * std::pow(2.0, rs.shells);
    for (OperatorValue* v : {&plus, &minus}) {
        v->err_near = rs.err_near;
        v->err_far = rs.err_far;
        v->r_in = rs.r_in;
        v->r_out = r_out;
        v->shells = rs.shells;
    }
    plus.value = vp;
    plus.err_quad = qp;
    minus.value = vm;
    minus.err_quad = qm;
}

}  // namespace

OperatorValue evaluate_L(const KernelSpec& k, const EvaluableFunction& u, const Vec& x,
                         const OperatorOptions& opts) {
    const Anisotropy& a = k.a;
    AnnulusRule probe = make_annulus_rule(a, opts.quad.radial_order, opts.quad.angular_order);
    KernelMoments mom = kernel_moments(a, probe);
    double q = a.q_max_s;
    double bound_factor = q * (k.mode == KernelMode::Reference ? 1.0 : k.Lambda);
    double extra_far = k.mode == KernelMode::Truncated ? 2.0 * u.sup_abs * k.c1 : 0.0;
    ResolvedScheme rs = resolve_scheme(a, mom, bound_factor, u, opts, extra_far);

    OperatorValue plus, minus;
    if (k.mode == KernelMode::Reference) {
        run_shells(a, u, x, opts, rs,
                   [&](const Vec&, double delta, double k0, double& gp, double& gm) {
                       gp = 0.5 * q * delta * k0;
                       gm = gp;
                   },
                   plus, minus);
    } else {
        run_shells(a, u, x, opts, rs,
                   [&](const Vec& y, double delta, double k0, double& gp, double& gm) {
                       gp = 0.5 * q * k.multiplier(y) * delta * k0;
                       gm = gp;
                   },
                   plus, minus);
    }
    return plus;
}

PucciPair evaluate_pucci(const Anisotropy& a, double lambda, double Lambda,
                         const EvaluableFunction& u, const Vec& x,
                         const OperatorOptions& opts) {
    AnnulusRule probe = make_annulus_rule(a, opts.quad.radial_order, opts.quad.angular_order);
    KernelMoments mom = kernel_moments(a, probe);
    double q = a.q_max_s;
    ResolvedScheme rs = resolve_scheme(a, mom, q * Lambda, u, opts, 0.0);

    PucciPair out;
    run_shells(a, u, x, opts, rs,
               [&](const Vec&, double delta, double k0, double& gp, double& gm) {
                   double dp = delta > 0 ? delta : 0.0;
                   double dm = delta < 0 ? -delta : 0.0;
                   gp = 0.5 * q * (Lambda * dp - lambda * dm) * k0;
                   gm = 0.5 * q * (lambda * dp - Lambda * dm) * k0;
               },
               out.plus, out.minus);
    return out;
}

}  // namespace anlg
