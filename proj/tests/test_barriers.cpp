#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anlg/barriers.hpp"

using namespace anlg;

TEST_CASE("eta pointwise values and boundary glue") {
    CHECK(eta_value(vec({0.0, 0.0})) == 1.0);
    CHECK(eta_value(vec({1.0, 0.0})) == 0.0);
    CHECK(eta_value(vec({1.4, 0.0})) == 0.0);
    // Vanishing value and gradient at the sphere: quadratic decay inside.
    double eps = 1e-4;
    CHECK(eta_value(vec({1.0 - eps, 0.0})) == doctest::Approx(4 * eps * eps).epsilon(1e-3));
}

TEST_CASE("eta second difference matches its Hessian at the origin") {
    EvaluableFunction eta = eta_barrier(2);
    // D^2 eta(0) = -4 Id, so delta(eta,0,y) -> -4|y|^2.
    for (double h : {1e-3, 1e-4}) {
        Vec y = vec({h, 0.5 * h});
        double d = second_difference(eta, zero_vec(2), y);
        CHECK(d / euclid_norm_sq(y) == doctest::Approx(-4.0).epsilon(1e-5));
    }
}

TEST_CASE("eta analytic and raw second differences agree") {
    EvaluableFunction eta = eta_barrier(2);
    Rng rng(9);
    for (int k = 0; k < 200; ++k) {
        Vec x = vec({rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)});
        Vec y = vec({rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)});
        double analytic = eta.delta2(x, y);
        double raw = eta.f(x + y) + eta.f(x - y) - 2 * eta.f(x);
        CHECK(analytic == doctest::Approx(raw).epsilon(1e-9));
        CHECK(std::fabs(analytic) <= 2 * eta.M * euclid_norm_sq(y) + 1e-12);
    }
}

TEST_CASE("operator of eta is bounded and refinement-stable on B_3/4") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    KernelSpec k = reference_kernel(a);
    EvaluableFunction eta = eta_barrier(2);
    OperatorOptions coarse, fine;
    coarse.quad.radial_order = 8;
    coarse.quad.angular_order = 8;
    fine.quad.radial_order = 12;
    fine.quad.angular_order = 12;
    double sup = 0;
    for (double x0 : {0.0, 0.3, 0.6}) {
        for (double x1 : {0.0, -0.35}) {
            Vec x = vec({x0, x1});
            if (euclid_norm(x) >= 0.75) continue;
            OperatorValue vc = evaluate_L(k, eta, x, coarse);
            OperatorValue vf = evaluate_L(k, eta, x, fine);
            sup = std::max(sup, std::fabs(vf.value));
            double scale = std::max(1.0, std::fabs(vf.value));
            CHECK(std::fabs(vc.value - vf.value) / scale < 0.01);
        }
    }
    CHECK(sup > 0.1);
    CHECK(sup < 100.0);
}

TEST_CASE("operator of eta survives the s to 4/b_max limit") {
    // The q_max_s prefactor compensates the diverging shell sum.
    for (double s : {1.0, 1.5, 1.9, 1.99}) {
        Anisotropy a = make_anisotropy({2, 2}, s);
        OperatorValue v = evaluate_L(reference_kernel(a), eta_barrier(2), zero_vec(2));
        INFO("s=", s, " value=", v.value);
        CHECK(std::isfinite(v.value));
        CHECK(std::fabs(v.value) < 200.0);
        CHECK(v.value < 0.0);  // concave cap at the center
    }
}

TEST_CASE("power barrier branch switch and symmetry") {
    double p = 3.0;
    CHECK(power_barrier_value(p, 0.5, vec({0.4, 0.0})) == std::pow(2.0, p));
    CHECK(power_barrier_value(p, 0.5, vec({0.0, 0.3})) == std::pow(2.0, p));
    CHECK(power_barrier_value(p, 0.5, vec({0.6, 0.0})) ==
          doctest::Approx(std::pow(0.6, -p)).epsilon(1e-14));
    CHECK(power_barrier_value(p, 0.5, vec({0.6, 0.8})) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(power_barrier_value(p, 0.5, vec({-0.6, 0.0})) ==
          doctest::Approx(power_barrier_value(p, 0.5, vec({0.0, 0.6}))).epsilon(1e-14));
}

TEST_CASE("power barrier stable second difference") {
    EvaluableFunction f = power_barrier(4.0, 0.5);
    Rng rng(31);
    for (int k = 0; k < 100; ++k) {
        double th = rng.uniform(0, 2 * M_PI);
        double r = rng.uniform(1.0, 5.0);
        Vec x = vec({r * std::cos(th), r * std::sin(th)});
        Vec y = vec({rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
        double analytic = f.delta2(x, y);
        double raw = f.f(x + y) + f.f(x - y) - 2 * f.f(x);
        CHECK(analytic == doctest::Approx(raw).epsilon(1e-8));
    }
}

TEST_CASE("find_p certifies the annulus for the reference configuration") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    PowerBarrierReport rep = find_p(a, 0.5, 2.0, 8.0, 4, 6);
    INFO("p=", rep.p, " min=", rep.min_minus, " iters=", rep.iterations);
    CHECK(rep.found);
    CHECK(rep.min_minus >= 0.0);
    CHECK(rep.p < 1e3);
}

TEST_CASE("scaled power barrier transports the certificate to an ellipse") {
    Anisotropy a = make_anisotropy({1, 2}, 1.0);
    double p = 8.0, r = 0.5;
    EvaluableFunction g = scaled_power_barrier(a, p, 0.5, r);
    EvaluableFunction f = power_barrier(p, 0.5);
    // g(x) = f(T^{-1} x) pointwise.
    Vec x = vec({0.3, 0.7});
    Vec z = map_apply_inverse(a, t_beta(r), x);
    CHECK(g.f(x) == doctest::Approx(f.f(z)).epsilon(1e-14));
    CHECK(g.delta2(x, 2 * 0.05 * x) ==
          doctest::Approx(f.delta2(z, map_apply_inverse(a, t_beta(r), 2 * 0.05 * x)))
              .epsilon(1e-12));
}

TEST_CASE("bump feasibility hinges on b_min") {
    BumpPsi ok = make_bump_psi(make_anisotropy({3, 4}, 0.5), 6.0);
    CHECK(ok.feasible);
    CHECK(ok.c_tilde > 0);

    BumpPsi bad = make_bump_psi(make_anisotropy({2, 2}, 1.0), 6.0);
    CHECK_FALSE(bad.feasible);  // corner of R_{1/4,3} escapes the support
    CHECK(bad.corner_z >= 3.0 * std::sqrt(2.0));
}

TEST_CASE("bump piecewise structure") {
    Anisotropy a = make_anisotropy({3, 4}, 0.5);
    BumpPsi psi = make_bump_psi(a, 6.0);
    int n = a.n;
    double outer = 3.0 * std::sqrt(static_cast<double>(n));

    // z <-> x: x_i = z_i 4^{-2/b_i}.
    auto x_of_z = [&](const Vec& z) {
        Vec x = zero_vec(n);
        for (int i = 0; i < n; ++i) x[i] = z[i] * std::pow(4.0, -2.0 / a.bi(i));
        return x;
    };

    // Outside the support: zero.
    CHECK(bump_value(psi, x_of_z(vec({outer + 0.1, 0}))) == 0.0);
    // Continuity at the outer sphere from inside.
    CHECK(bump_value(psi, x_of_z(vec({outer - 1e-7, 0}))) ==
          doctest::Approx(0.0).epsilon(1e-5));
    // Value and derivative continuity across |z| = 1 along both axes.
    for (int i = 0; i < n; ++i) {
        Vec zin = zero_vec(n), zout = zero_vec(n);
        zin[i] = 1.0 - 1e-6;
        zout[i] = 1.0 + 1e-6;
        double vin = bump_value(psi, x_of_z(zin));
        double vout = bump_value(psi, x_of_z(zout));
        // Offset 2e-6 across the interface, slope ~ p c_tilde: no jump means
        // agreement at the slope-times-offset scale.
        CHECK(std::fabs(vin - vout) < 4e-6 * psi.p * psi.c_tilde);
        // One-sided slopes in z agree to O(1e-6).
        Vec zin2 = zin, zout2 = zout;
        zin2[i] -= 1e-6;
        zout2[i] += 1e-6;
        double din = (vin - bump_value(psi, x_of_z(zin2))) / 1e-6;
        double dout = (bump_value(psi, x_of_z(zout2)) - vout) / 1e-6;
        CHECK(din == doctest::Approx(dout).epsilon(1e-3));
    }
    // Above 3 on the comparison rectangle (sampled).
    Rng rng(15);
    for (int k = 0; k < 2000; ++k) {
        Vec x = zero_vec(n);
        for (int i = 0; i < n; ++i) {
            double half = std::pow(3.0, 2.0 / a.b_min) * std::pow(0.25, 2.0 / a.bi(i));
            x[i] = rng.uniform(-half, half);
        }
        CHECK(bump_value(psi, x) > 3.0);
    }
}

TEST_CASE("eta tail integral behaves monotonically in tau") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    TailIntegral t1 = eta_tail_integral(a, 0.4);
    TailIntegral t2 = eta_tail_integral(a, 0.2);
    TailIntegral t3 = eta_tail_integral(a, 0.1);
    CHECK(t1.value > t2.value);
    CHECK(t2.value > t3.value);
    CHECK(t3.value > 0);
    CHECK_THROWS_AS(eta_tail_integral(a, 2.0), std::invalid_argument);
}

TEST_CASE("silvestre certificate for the reference configuration") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    double delta = unit_ball_volume(2) / 2.0;
    SilvestreCertificate cert = find_kappa_tau(a, delta, 5, 121);
    INFO("kappa=", cert.last.kappa, " tau=", cert.last.tau, " margin=", cert.last.margin,
         " iters=", cert.iterations);
    CHECK(cert.certified);
    CHECK(cert.last.margin > 0);
    CHECK(cert.last.kappa < 0.25);
    CHECK(cert.last.rhs > 0);

    // Linearity in kappa: halving kappa halves the eta contribution.
    SilvestreResult r1 = silvestre_check(a, delta, 0.2, 0.2, 5, 121);
    SilvestreResult r2 = silvestre_check(a, delta, 0.1, 0.2, 5, 121);
    CHECK(r1.eta_sup == doctest::Approx(r2.eta_sup).epsilon(1e-12));
    CHECK(r1.lhs - r1.tail_value - r1.tail_err ==
          doctest::Approx(2.0 * (r2.lhs - r2.tail_value - r2.tail_err)).epsilon(1e-9));
}
