#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "anlg/nonlocal.hpp"

using namespace anlg;

namespace {

// ---------------------------------------------------------------------------
// Independent oracle: tanh-sinh quadrature on (0,1), endpoint singularity at
// zero allowed.  Node positions near zero are generated on the stable branch
// y = e^{2z}/(1+e^{2z}) so distance-to-endpoint never collapses in double.

struct TSRule {
    std::vector<double> y, w;
};

TSRule ts_rule(double h) {
    TSRule r;
    for (double t = -6.5; t <= 6.5; t += h) {
        double z = 0.5 * M_PI * std::sinh(t);
        double ch = std::cosh(z);
        double w = h * 0.25 * M_PI * std::cosh(t) / (ch * ch);
        double y = z < 0 ? std::exp(2 * z) / (1 + std::exp(2 * z))
                         : 1.0 / (1 + std::exp(-2 * z));
        // Nodes below 1e-60 contribute < 1e-30 for every integrand here
        // (|g| <~ y^{1-kappa}, kappa < 2) and only risk 0 * inf noise.
        if (!(w > 1e-280) || y < 1e-60 || y >= 1) continue;
        r.y.push_back(y);
        r.w.push_back(w);
    }
    return r;
}

template <typename F>
double ts_integrate(const TSRule& r, const F& f) {
    double s = 0;
    for (size_t i = 0; i < r.y.size(); ++i) s += r.w[i] * f(r.y[i]);
    return s;
}

// Two-level tanh-sinh value with its own convergence estimate.
template <typename F>
double ts_value(const F& f, double& err) {
    double c1 = ts_integrate(ts_rule(1.0 / 64), f);
    double c2 = ts_integrate(ts_rule(1.0 / 128), f);
    err = std::fabs(c2 - c1);
    return c2;
}

// L u(x) for n = 1: kernel q |y|^{-1-kappa} with kappa = b s / 2, evaluated
// as int_0^1 delta y^{-1-kappa} dy + int_0^1 delta(1/t) t^{kappa-1} dt.
template <typename Delta>
double oracle_line(double q, double kappa, const Delta& delta, double& err) {
    double e1 = 0, e2 = 0;
    double inner = ts_value([&](double y) { return delta(y) * std::pow(y, -1.0 - kappa); }, e1);
    double outer = ts_value([&](double t) { return delta(1.0 / t) * std::pow(t, kappa - 1.0); }, e2);
    err = q * (e1 + e2) + 1e-13;
    return q * (inner + outer);
}

// Cancellation-free second differences near the origin; the expm1/sinh forms
// overflow for large arguments, so past |y|^2 = 1/4 the raw three-point form
// takes over (no cancellation left to fear there).
double delta_gauss(double x, double y) {
    if (y * y > 0.25)
        return std::exp(-sq(x + y)) + std::exp(-sq(x - y)) - 2 * std::exp(-x * x);
    double sh = std::sinh(x * y);
    return 2.0 * std::exp(-x * x) *
           (2.0 * std::exp(-y * y) * sh * sh + std::expm1(-y * y));
}

double delta_xgauss(double x, double y) {
    if (y * y > 0.25)
        return (x + y) * std::exp(-sq(x + y)) + (x - y) * std::exp(-sq(x - y)) -
               2 * x * std::exp(-x * x);
    double sh = std::sinh(x * y);
    return 2.0 * std::exp(-x * x - y * y) *
           (x * (2.0 * sh * sh - std::expm1(y * y)) - y * std::sinh(2.0 * x * y));
}

double delta_lorentz(double x, double y) {
    double A = 1 + x * x + y * y, B = 2 * x * y;
    return 2.0 * y * y * (3 * x * x - 1 - y * y) / ((A * A - B * B) * (1 + x * x));
}

double delta_gauss_nd(const Vec& x, const Vec& y) {
    double xy = dot(x, y), yy = dot(y, y), xx = dot(x, x);
    if (yy > 0.25) {
        Vec p = x + y, m = x - y;
        return std::exp(-dot(p, p)) + std::exp(-dot(m, m)) - 2 * std::exp(-xx);
    }
    double sh = std::sinh(xy);
    return 2.0 * std::exp(-xx) * (2.0 * std::exp(-yy) * sh * sh + std::expm1(-yy));
}

EvaluableFunction gauss_nd(int n) {
    EvaluableFunction u;
    u.f = [](const Vec& p) { return std::exp(-dot(p, p)); };
    u.delta2 = delta_gauss_nd;
    u.M = 1.0;  // sup |u''| = 2 along any line
    u.eta0 = 50;
    u.sup_abs = 1.0;
    (void)n;
    return u;
}

EvaluableFunction xgauss_1d() {
    EvaluableFunction u;
    u.f = [](const Vec& p) { return p[0] * std::exp(-p[0] * p[0]); };
    u.delta2 = [](const Vec& x, const Vec& y) { return delta_xgauss(x[0], y[0]); };
    u.M = 3.0;
    u.eta0 = 50;
    u.sup_abs = std::exp(-0.5) / std::sqrt(2.0);
    return u;
}

EvaluableFunction lorentz_1d() {
    EvaluableFunction u;
    u.f = [](const Vec& p) { return 1.0 / (1.0 + p[0] * p[0]); };
    u.delta2 = [](const Vec& x, const Vec& y) { return delta_lorentz(x[0], y[0]); };
    u.M = 1.0;
    u.eta0 = 50;
    u.sup_abs = 1.0;
    return u;
}

}  // namespace

TEST_CASE("tanh-sinh rule integrates exactly known singular integrals") {
    double e;
    CHECK(ts_value([](double) { return 1.0; }, e) == doctest::Approx(1.0).epsilon(1e-13));
    // int_0^1 y^{-1/2} = 2, int_0^1 y^{-0.7} = 10/3, int_0^1 log(y) = -1.
    CHECK(ts_value([](double y) { return std::pow(y, -0.5); }, e) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ts_value([](double y) { return std::pow(y, -0.7); }, e) ==
          doctest::Approx(10.0 / 3.0).epsilon(1e-11));
    CHECK(ts_value([](double y) { return std::log(y); }, e) ==
          doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("line operator matches the independent oracle") {
    struct Cfg {
        double b, s;
    };
    std::vector<Cfg> cfgs = {{2, 1.0}, {2, 1.5}, {1, 1.2}, {3, 1.0}};
    std::vector<EvaluableFunction> us = {gauss_nd(1), xgauss_1d(), lorentz_1d()};
    std::vector<std::function<double(double, double)>> deltas = {delta_gauss, delta_xgauss,
                                                                delta_lorentz};
    OperatorOptions opts;
    opts.target_error = 1e-8;
    opts.quad.radial_order = 12;
    opts.quad.angular_order = 12;

    for (const Cfg& cfg : cfgs) {
        Anisotropy a = make_anisotropy({cfg.b}, cfg.s);
        KernelSpec k = reference_kernel(a);
        double kappa = cfg.b * cfg.s / 2.0;
        for (size_t iu = 0; iu < us.size(); ++iu) {
            for (double x0 : {0.0, 0.7, -1.3}) {
                Vec x = vec({x0});
                OperatorValue lv = evaluate_L(k, us[iu], x, opts);
                double oerr = 0;
                double ov = oracle_line(
                    a.q_max_s, kappa, [&](double y) { return deltas[iu](x0, y); }, oerr);
                INFO("b=", cfg.b, " s=", cfg.s, " fn=", iu, " x=", x0, " lib=", lv.value,
                     " oracle=", ov, " liberr=", lv.total_err(), " oerr=", oerr);
                CHECK(std::fabs(lv.value - ov) <= lv.total_err() + oerr + 1e-9);
                CHECK(lv.total_err() < 2e-3);
            }
        }
    }
}

TEST_CASE("plane isotropic operator matches a polar oracle") {
    for (double s : {0.8, 1.5}) {
        Anisotropy a = make_anisotropy({2, 2}, s);
        KernelSpec k = reference_kernel(a);
        EvaluableFunction u = gauss_nd(2);
        Vec x = vec({0.3, -0.4});

        OperatorOptions opts;
        opts.target_error = 1e-8;
        opts.quad.radial_order = 12;
        opts.quad.angular_order = 12;
        OperatorValue lv = evaluate_L(k, u, x, opts);

        const int N = 96;
        auto F = [&](double r) {
            double s_ang = 0;
            for (int j = 0; j < N; ++j) {
                double th = 2.0 * M_PI * j / N;
                Vec y = vec({r * std::cos(th), r * std::sin(th)});
                s_ang += delta_gauss_nd(x, y);
            }
            return 0.5 * s_ang * (2.0 * M_PI / N);
        };
        double e1 = 0, e2 = 0;
        double inner = ts_value([&](double r) { return F(r) * std::pow(r, -1.0 - s); }, e1);
        double outer = ts_value([&](double t) { return F(1.0 / t) * std::pow(t, s - 1.0); }, e2);
        double ov = a.q_max_s * (inner + outer);
        double oerr = a.q_max_s * (e1 + e2) + 1e-12;

        INFO("s=", s, " lib=", lv.value, " oracle=", ov, " bracket=", lv.total_err());
        CHECK(std::fabs(lv.value - ov) <= lv.total_err() + oerr + 1e-8);
    }
}

TEST_CASE("annulus second moments against closed forms") {
    // Euclidean isotropic cases integrate in polar closed form:
    // n=2: J_i = pi (2^{2-s}-1)/(2-s);  n=3: J_i = (4 pi/3)(2^{2-s}-1)/(2-s).
    double s = 0.7;
    {
        Anisotropy a = make_anisotropy({2, 2}, s);
        KernelMoments m = kernel_moments(a, make_annulus_rule(a, 14, 14));
        double exact = M_PI * (std::pow(2.0, 2 - s) - 1.0) / (2 - s);
        CHECK(m.J[0] == doctest::Approx(exact).epsilon(1e-9));
        CHECK(m.J[1] == doctest::Approx(exact).epsilon(1e-9));
    }
    {
        Anisotropy a = make_anisotropy({2, 2, 2}, s);
        KernelMoments m = kernel_moments(a, make_annulus_rule(a, 16, 16));
        double exact = (4.0 * M_PI / 3.0) * (std::pow(2.0, 2 - s) - 1.0) / (2 - s);
        for (int i = 0; i < 3; ++i)
            CHECK(m.J[static_cast<size_t>(i)] == doctest::Approx(exact).epsilon(1e-3));
    }
}

TEST_CASE("constants are annihilated exactly") {
    Anisotropy a = make_anisotropy({1, 2}, 0.8);
    EvaluableFunction u;
    u.f = [](const Vec&) { return 3.25; };
    u.M = 0;
    u.eta0 = 10;
    u.sup_abs = 3.25;
    OperatorValue v = evaluate_L(reference_kernel(a), u, vec({0.1, 0.2}));
    CHECK(v.value == 0.0);
    CHECK(v.err_quad == 0.0);
    CHECK(v.err_near == 0.0);
}

TEST_CASE("pucci collapses to L when lambda equals Lambda") {
    Anisotropy a = make_anisotropy({1, 2}, 0.8);
    EvaluableFunction u = gauss_nd(2);
    Vec x = vec({0.4, -0.1});
    OperatorOptions opts;
    opts.target_error = 1e-7;
    OperatorValue lv = evaluate_L(reference_kernel(a), u, x, opts);
    PucciPair p = evaluate_pucci(a, 1.0, 1.0, u, x, opts);
    CHECK(std::fabs(p.plus.value - lv.value) <= p.plus.total_err() + lv.total_err());
    CHECK(std::fabs(p.minus.value - lv.value) <= p.minus.total_err() + lv.total_err());
}

TEST_CASE("pucci antisymmetry under sign flip") {
    Anisotropy a = make_anisotropy({1, 4}, 0.6);
    EvaluableFunction u = gauss_nd(2);
    EvaluableFunction nu = u;
    nu.f = [&](const Vec& p) { return -std::exp(-dot(p, p)); };
    nu.delta2 = [](const Vec& x, const Vec& y) { return -delta_gauss_nd(x, y); };
    Vec x = vec({0.25, 0.6});
    PucciPair pu = evaluate_pucci(a, 0.5, 2.0, u, x);
    PucciPair pn = evaluate_pucci(a, 0.5, 2.0, nu, x);
    CHECK(pn.plus.value == doctest::Approx(-pu.minus.value).epsilon(1e-12));
    CHECK(pn.minus.value == doctest::Approx(-pu.plus.value).epsilon(1e-12));
}

TEST_CASE("pucci brackets every bounded kernel") {
    Anisotropy a = make_anisotropy({1, 2}, 1.1);
    double lambda = 0.5, Lambda = 2.0;
    KernelSpec k = bounded_kernel(a, lambda, Lambda, [](const Vec& y) {
        double c = std::cos(y[0] + 2.0 * y[1]);
        return 0.5 + 0.25 + 1.25 * c * c;  // range [0.75, 2] inside [0.5, 2]
    });
    EvaluableFunction u = gauss_nd(2);
    OperatorOptions opts;
    opts.target_error = 1e-7;
    for (double x0 : {0.0, 0.5, -0.8}) {
        Vec x = vec({x0, 0.3 * x0 - 0.2});
        OperatorValue lv = evaluate_L(k, u, x, opts);
        PucciPair p = evaluate_pucci(a, lambda, Lambda, u, x, opts);
        double slack = lv.total_err() + p.plus.total_err() + p.minus.total_err();
        CHECK(lv.value <= p.plus.value + slack);
        CHECK(lv.value >= p.minus.value - slack);
    }
}

TEST_CASE("reference operator scaling covariance") {
    // v = u o T_beta(r)  =>  L v (x) = r^s (L u)(T_beta(r) x).
    Anisotropy a = make_anisotropy({1, 2}, 0.8);
    double r = 0.5;
    EvaluableFunction u = gauss_nd(2);
    EvaluableFunction v;
    ScalingMap tb = t_beta(r);
    v.f = [&, tb](const Vec& p) {
        Vec q = map_apply(a, tb, p);
        return std::exp(-dot(q, q));
    };
    v.delta2 = [&, tb](const Vec& x, const Vec& y) {
        return delta_gauss_nd(map_apply(a, tb, x), map_apply(a, tb, y));
    };
    v.M = 1.0;
    v.eta0 = 50;
    v.sup_abs = 1.0;

    KernelSpec k = reference_kernel(a);
    OperatorOptions opts;
    opts.target_error = 1e-8;
    Vec x = vec({0.4, 0.2});
    OperatorValue left = evaluate_L(k, v, x, opts);
    OperatorValue right = evaluate_L(k, u, map_apply(a, tb, x), opts);
    double rhs = std::pow(r, a.s) * right.value;
    CHECK(std::fabs(left.value - rhs) <=
          left.total_err() + std::pow(r, a.s) * right.total_err() + 1e-8);
}

TEST_CASE("truncated kernels budget their perturbation") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    KernelSpec kb = bounded_kernel(a, 1.0, 1.0, [](const Vec&) { return 1.0; });
    KernelSpec kt = kb;
    kt.mode = KernelMode::Truncated;
    kt.c1 = 0.3;
    EvaluableFunction u = gauss_nd(2);
    Vec x = vec({0.2, 0.1});
    OperatorValue vb = evaluate_L(kb, u, x);
    OperatorValue vt = evaluate_L(kt, u, x);
    CHECK(vt.value == doctest::Approx(vb.value).epsilon(1e-12));
    CHECK(vt.err_far >= 2.0 * u.sup_abs * 0.3);
}

TEST_CASE("raw and analytic second differences agree at moderate targets") {
    Anisotropy a = make_anisotropy({1, 2}, 0.8);
    EvaluableFunction ua = gauss_nd(2);
    EvaluableFunction ur = ua;
    ur.delta2 = nullptr;
    Vec x = vec({0.3, 0.3});
    OperatorOptions opts;
    opts.target_error = 1e-6;
    OperatorValue va = evaluate_L(reference_kernel(a), ua, x, opts);
    OperatorValue vr = evaluate_L(reference_kernel(a), ur, x, opts);
    CHECK(std::fabs(va.value - vr.value) <= va.total_err() + vr.total_err() + 1e-8);
}
