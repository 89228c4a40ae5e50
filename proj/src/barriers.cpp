#include "anlg/barriers.hpp"

#include <cmath>

namespace anlg {

// ---------------------------------------------------------------------------
// eta

double eta_value(const Vec& x) {
    double t = euclid_norm_sq(x);
    return t < 1.0 ? sq(1.0 - t) : 0.0;
}

EvaluableFunction eta_barrier(int n) {
    (void)n;
    EvaluableFunction u;
    u.f = eta_value;
    u.delta2 = [](const Vec& x, const Vec& y) {
        Vec xp = x + y, xm = x - y;
        if (euclid_norm_sq(x) < 1.0 && euclid_norm_sq(xp) < 1.0 && euclid_norm_sq(xm) < 1.0) {
            // All three points on the polynomial branch: expanding
            // (A -+ 2w - t)^2 with A = 1-|x|^2, w = <x,y>, t = |y|^2 gives an
            // exact cancellation-free form.
            double A = 1.0 - euclid_norm_sq(x);
            double t = euclid_norm_sq(y);
            double w = dot(x, y);
            return 2.0 * t * t + 8.0 * w * w - 4.0 * A * t;
        }
        return eta_value(xp) + eta_value(xm) - 2.0 * eta_value(x);
    };
    u.M = 4.0;  // |delta| <= 2M|y|^2 from |D^2 eta| <= 8
    u.eta0 = 100.0;
    u.sup_abs = 1.0;
    return u;
}

// ---------------------------------------------------------------------------
// power barrier

double power_barrier_value(double p, double kappa, const Vec& x) {
    double r = euclid_norm(x);
    if (r <= kappa) return std::pow(kappa, -p);
    return std::pow(r, -p);
}

namespace {

// Stable second difference of the pure power branch |.|^{-p}: factor |x|^{-p}
// and use (1+t)^{-p/2} - 1 = expm1(-(p/2) log1p(t)).
double power_delta_stable(double p, const Vec& x, const Vec& y) {
    double xx = euclid_norm_sq(x);
    double yy = euclid_norm_sq(y);
    double w = 2.0 * dot(x, y);
    double tp = (yy + w) / xx, tm = (yy - w) / xx;
    double gp = std::expm1(-0.5 * p * std::log1p(tp));
    double gm = std::expm1(-0.5 * p * std::log1p(tm));
    return std::pow(xx, -0.5 * p) * (gp + gm);
}

}  // namespace

EvaluableFunction power_barrier(double p, double kappa) {
    EvaluableFunction u;
    u.f = [p, kappa](const Vec& v) { return power_barrier_value(p, kappa, v); };
    u.delta2 = [p, kappa](const Vec& x, const Vec& y) {
        double rx = euclid_norm(x);
        double ry = euclid_norm(y);
        // Small steps from outside the cap stay on the power branch.
        if (rx >= kappa + 2 * ry && ry < 0.25 * rx) return power_delta_stable(p, x, y);
        return power_barrier_value(p, kappa, x + y) + power_barrier_value(p, kappa, x - y) -
               2.0 * power_barrier_value(p, kappa, x);
    };
    double rmin = 0.5 * (1.0 + kappa);         // closest approach to the kink
    u.eta0 = 0.5 * (1.0 - kappa);              // valid around points with |x| >= 1
    u.M = 0.5 * p * (p + 2) * std::pow(rmin, -p - 2);
    u.sup_abs = std::pow(kappa, -p);
    return u;
}

EvaluableFunction scaled_power_barrier(const Anisotropy& a, double p, double kappa, double r) {
    EvaluableFunction base = power_barrier(p, kappa);
    ScalingMap inv = t_beta(r);
    EvaluableFunction u;
    u.f = [a, inv, base](const Vec& v) { return base.f(map_apply_inverse(a, inv, v)); };
    u.delta2 = [a, inv, base](const Vec& x, const Vec& y) {
        return base.delta2(map_apply_inverse(a, inv, x), map_apply_inverse(a, inv, y));
    };
    double fmax = 1, fmin = 1;
    for (int i = 0; i < a.n; ++i) {
        double f = std::pow(r, 2.0 / a.bi(i));
        fmax = std::max(fmax, 1.0 / f);
        fmin = std::min(fmin, f);
    }
    u.M = base.M * fmax * fmax;
    u.eta0 = base.eta0 * fmin;
    u.sup_abs = base.sup_abs;
    return u;
}

PowerBarrierReport find_p(const Anisotropy& a, double lambda, double Lambda, double R,
                          int radial_pts, int angular_pts, double p0, int iteration_cap) {
    PowerBarrierReport rep;
    rep.kappa = 0.5;

    // Geometric radii over [1, R] crossed with a direction set.
    std::vector<Vec> grid;
    for (int j = 0; j < radial_pts; ++j) {
        double rad = radial_pts == 1 ? 1.0 : std::pow(R, static_cast<double>(j) / (radial_pts - 1));
        if (a.n == 1) {
            grid.push_back(vec({rad}));
            grid.push_back(vec({-rad}));
        } else if (a.n == 2) {
            for (int k = 0; k < angular_pts; ++k) {
                double th = 2.0 * M_PI * k / angular_pts;
                grid.push_back(vec({rad * std::cos(th), rad * std::sin(th)}));
            }
        } else {
            // Fibonacci sphere directions.
            double ga = M_PI * (3.0 - std::sqrt(5.0));
            for (int k = 0; k < angular_pts; ++k) {
                double zc = 1.0 - 2.0 * (k + 0.5) / angular_pts;
                double rc = std::sqrt(std::max(0.0, 1.0 - zc * zc));
                double th = ga * k;
                grid.push_back(
                    vec({rad * rc * std::cos(th), rad * rc * std::sin(th), rad * zc}));
            }
        }
    }
    rep.grid = grid;

    OperatorOptions opts;
    opts.target_error = 1e-4;
    double p = p0;
    for (int it = 0; it < iteration_cap; ++it) {
        if (p > 1e4) break;  // overflow guard: certificate hopeless out here
        EvaluableFunction f = power_barrier(p, 0.5);
        double worst = std::numeric_limits<double>::infinity();
        for (const Vec& x : grid) {
            PucciPair pp = evaluate_pucci(a, lambda, Lambda, f, x, opts);
            worst = std::min(worst, pp.minus.value - pp.minus.total_err());
        }
        rep.iterations = it + 1;
        rep.p = p;
        rep.min_minus = worst;
        if (worst >= 0) {
            rep.found = true;
            return rep;
        }
        p *= 2;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// bump Psi

BumpPsi make_bump_psi(const Anisotropy& a, double p) {
    BumpPsi psi;
    psi.a = a;
    psi.p = p;
    double n = a.n;
    double outer = 3.0 * std::sqrt(n);
    double v0 = 1.0 - std::pow(outer, -p);
    psi.cap_A = v0 + 0.5 * p;
    for (int i = 0; i < a.n; ++i)
        psi.cap_kappa[static_cast<size_t>(i)] = 0.5 * p * std::pow(4.0, 4.0 / a.bi(i));
    psi.corner_z = std::sqrt(n) * std::pow(3.0, 2.0 / a.b_min);
    psi.feasible = psi.corner_z < outer;
    if (psi.feasible) {
        double corner_val = std::pow(psi.corner_z, -p) - std::pow(outer, -p);
        psi.c_tilde = 3.0 / corner_val;
    }
    return psi;
}

double bump_value(const BumpPsi& psi, const Vec& x) {
    const Anisotropy& a = psi.a;
    double zz = 0;
    for (int i = 0; i < a.n; ++i) zz += sq(x[i] * std::pow(4.0, 2.0 / a.bi(i)));
    double rz = std::sqrt(zz);
    double outer = 3.0 * std::sqrt(static_cast<double>(a.n));
    if (rz >= outer) return 0.0;
    if (rz >= 1.0)
        return psi.c_tilde * (std::pow(rz, -psi.p) - std::pow(outer, -psi.p));
    return psi.c_tilde * (psi.cap_A - 0.5 * psi.p * zz);
}

EvaluableFunction bump_function(const BumpPsi& psi) {
    EvaluableFunction u;
    BumpPsi p = psi;
    u.f = [p](const Vec& v) { return bump_value(p, v); };
    // |D^2 Psi| over both smooth pieces; the outer support edge is only C^0,
    // so the bound holds at points whose eta0-ball avoids that sphere.
    double chain = std::pow(16.0, 2.0 / psi.a.b_min);
    u.M = psi.c_tilde * psi.p * (psi.p + 2.0) * chain;
    u.eta0 = 0.05;
    u.sup_abs = psi.c_tilde * psi.cap_A;
    return u;
}

// ---------------------------------------------------------------------------
// Silvestre pieces

TailIntegral eta_tail_integral(const Anisotropy& a, double tau, int radial_order,
                               int angular_order) {
    if (!(tau > 0) || !(tau < 0.5 * a.s * a.b_min))
        throw std::invalid_argument("eta_tail_integral: need 0 < tau < s b_min / 2");
    TailIntegral out;
    AnnulusRule hi = make_annulus_rule(a, radial_order, angular_order);
    AnnulusRule lo = make_annulus_rule(a, std::max(2, radial_order - 2),
                                       std::max(2, angular_order - 2));

    // Shells below this scale lie entirely inside B_{1/4}.
    double u0 = 0.5;
    while (theta_euclid_sandwich(a, 2 * u0).outer > 0.25) u0 *= 0.5;

    auto shell_val = [&](const AnnulusRule& rule, double uk) {
        std::array<double, kMaxDim> fac{};
        for (int i = 0; i < a.n; ++i) fac[static_cast<size_t>(i)] = std::pow(uk, 2.0 / a.bi(i));
        double ws = std::pow(uk, a.c);
        double s = 0;
        for (const auto& node : rule.nodes) {
            Vec y = zero_vec(a.n);
            for (int i = 0; i < a.n; ++i) y[i] = fac[static_cast<size_t>(i)] * node.z[i];
            if (euclid_norm_sq(y) <= 0.0625) continue;
            double k0 = std::pow(uk * node.rho, -(a.c + a.s));
            double g = std::expm1(tau * std::log(64.0 * euclid_norm_sq(y)) * 0.5);
            s += node.w * ws * g * k0;
        }
        return s;
    };

    // The integrand is bounded by (8 sqrt n)^tau |y|_b^{2 tau / b_min} K0 once
    // |y|_b >= 1, giving a closed-form tail with shifted exponent.
    double sigma = a.s - 2.0 * tau / a.b_min;
    double uk = u0;
    double accum = 0;
    for (int k = 0; k < 400; ++k) {
        double v_hi = shell_val(hi, uk);
        double v_lo = shell_val(lo, uk);
        accum += v_hi;
        out.err_quad += std::fabs(v_hi - v_lo);
        ++out.shells;
        uk *= 2;
        if (uk >= 1.0) {
            double tail = std::pow(8.0 * std::sqrt(static_cast<double>(a.n)), tau) *
                          a.c * theta_unit_volume(a) * std::pow(uk, -sigma) / sigma;
            if (tail < 1e-12 * std::max(1.0, std::fabs(accum)) || k == 399) {
                out.tail_bound = tail;
                break;
            }
        }
    }
    out.value = 2.0 * accum;
    out.err_quad *= 2.0;
    out.tail_bound *= 2.0;
    return out;
}

namespace {

struct SilvestreParts {
    double eta_sup = 0;
    double eta_err = 0;
    double rhs = 0;
};

SilvestreParts silvestre_parts(const Anisotropy& a, double delta, int grid,
                               int bathtub_resolution) {
    if (!(delta > 0) || delta >= volume(a, euclid_ball(zero_vec(a.n), 2.0)))
        throw std::invalid_argument("silvestre_check: need 0 < delta < |B_2|");
    SilvestreParts parts;

    EvaluableFunction eta = eta_barrier(a.n);
    KernelSpec k = reference_kernel(a);
    OperatorOptions opts;
    opts.target_error = 1e-6;
    double sup = -std::numeric_limits<double>::infinity();
    double sup_err = 0;
    std::vector<Vec> pts;
    double h = grid > 1 ? 1.5 / (grid - 1) : 0.0;
    std::array<int, 3> idx{};
    int total = 1;
    for (int i = 0; i < a.n; ++i) total *= grid;
    for (int t = 0; t < total; ++t) {
        int rem = t;
        Vec x = zero_vec(a.n);
        for (int i = 0; i < a.n; ++i) {
            idx[static_cast<size_t>(i)] = rem % grid;
            rem /= grid;
            x[i] = -0.75 + h * idx[static_cast<size_t>(i)];
        }
        if (euclid_norm(x) < 0.75) pts.push_back(x);
    }
    for (const Vec& x : pts) {
        OperatorValue v = evaluate_L(k, eta, x, opts);
        double minus_l = -v.value;  // (-Delta)^{beta,s} eta = -L eta
        if (minus_l > sup) {
            sup = minus_l;
            sup_err = v.total_err();
        }
    }
    parts.eta_sup = sup;
    parts.eta_err = sup_err;

    BathtubResult tub = bathtub_infimum(a, delta, bathtub_resolution);
    parts.rhs = 0.5 * tub.value;
    return parts;
}

SilvestreResult assemble(const Anisotropy& a, const SilvestreParts& parts, double kappa,
                         double tau, int grid, int bathtub_resolution) {
    SilvestreResult r;
    r.kappa = kappa;
    r.tau = tau;
    r.eta_sup = parts.eta_sup;
    r.eta_err = parts.eta_err;
    TailIntegral tail = eta_tail_integral(a, tau);
    r.tail_value = tail.value;
    r.tail_err = tail.err_quad + tail.tail_bound;
    r.lhs = kappa * (parts.eta_sup + parts.eta_err) + tail.value + r.tail_err;
    r.rhs = parts.rhs;
    r.margin = r.rhs - r.lhs;
    r.grid = grid;
    r.bathtub_resolution = bathtub_resolution;
    return r;
}

}  // namespace

SilvestreResult silvestre_check(const Anisotropy& a, double delta, double kappa, double tau,
                                int grid, int bathtub_resolution) {
    SilvestreParts parts = silvestre_parts(a, delta, grid, bathtub_resolution);
    return assemble(a, parts, kappa, tau, grid, bathtub_resolution);
}

SilvestreCertificate find_kappa_tau(const Anisotropy& a, double delta, int grid,
                                    int bathtub_resolution, int iteration_cap) {
    SilvestreCertificate cert;
    SilvestreParts parts = silvestre_parts(a, delta, grid, bathtub_resolution);
    double kappa = 0.2;
    double tau = 0.25 * a.s * a.b_min;
    for (int it = 0; it < iteration_cap; ++it) {
        cert.last = assemble(a, parts, kappa, tau, grid, bathtub_resolution);
        cert.iterations = it + 1;
        if (cert.last.margin > 0) {
            cert.certified = true;
            return cert;
        }
        kappa *= 0.5;
        tau *= 0.5;
    }
    return cert;
}

}  // namespace anlg
