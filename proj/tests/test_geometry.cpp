#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "anlg/quadrature.hpp"
#include "anlg/regions.hpp"

using namespace anlg;

namespace {

Anisotropy iso22() { return make_anisotropy({2, 2}, 1.0); }

// Closed-form minimal dilation constant when all exponents are equal.  Both
// ellipsoid conditions reduce to radius comparisons and the Theta condition
// to a p-norm versus 2-norm extremum, which sits at a vertex for b < 2 and at
// the diagonal for b >= 2.
int frak_C_equal_exponents(int n, double b) {
    double nd = n;
    double euclid_sup = b >= 2.0 ? std::sqrt(nd) : std::pow(nd, 1.0 / b);
    for (int C = 1; C <= 64; ++C) {
        bool ball = std::pow(C, 2.0 / b) >= euclid_sup;
        bool shrink = std::pow(std::pow(2.0, -C), 2.0 / b) <= 0.25;
        bool shell = std::pow(std::pow(2.0, -C * b / 2.0), 2.0 / b) <= 0.5;
        if (ball && shrink && shell) return C;
    }
    return -1;
}

}  // namespace

TEST_CASE("anisotropic norm basics") {
    Anisotropy a = iso22();
    CHECK(aniso_norm(a, vec({3, 4})) == doctest::Approx(5.0).epsilon(1e-14));

    Anisotropy a14 = make_anisotropy({1, 4}, 0.5);
    CHECK(aniso_norm(a14, vec({4, 0})) == doctest::Approx(2.0).epsilon(1e-14));

    // Homogeneity under T_beta at 1e-12 on random draws.
    Rng rng(42);
    for (int k = 0; k < 100; ++k) {
        Anisotropy a2 = make_anisotropy({rng.uniform(0.8, 3.0), rng.uniform(0.8, 3.0)}, 0.3);
        double r = rng.uniform(0.1, 5.0);
        Vec y = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
        Vec ty = map_apply(a2, t_beta(r), y);
        CHECK(aniso_norm(a2, ty) == doctest::Approx(r * aniso_norm(a2, y)).epsilon(1e-12));
    }
}

TEST_CASE("derived exponents and validity range") {
    Anisotropy a = make_anisotropy({1, 2}, 1.0);
    CHECK(a.c == doctest::Approx(3.0));
    CHECK(a.q_max_s == doctest::Approx(1.0));
    CHECK(a.q_min_s == doctest::Approx(3.0));
    CHECK(a.b_min == 1.0);
    CHECK(a.b_max == 2.0);

    CHECK_THROWS_AS(make_anisotropy({1, 2}, 2.0), std::invalid_argument);   // s = 4/b_max
    CHECK_THROWS_AS(make_anisotropy({1, 2}, 2.5), std::invalid_argument);
    CHECK_THROWS_AS(make_anisotropy({0.0, 2}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_anisotropy({-1, 2}, 0.5), std::invalid_argument);
}

TEST_CASE("strict membership puts boundaries outside") {
    Anisotropy a = make_anisotropy({1, 2}, 1.0);
    Vec x = vec({0.3, -0.2});
    Ellipsoid e = ellipsoid_E(x, 0.7, 0.5);
    // Strict inequality: just outside fails, just inside passes.
    Vec bd = x;
    bd[0] += (1 + 1e-9) * e.l * std::pow(e.r, 2.0 / a.bi(0));
    CHECK_FALSE(contains(a, e, bd));
    Vec inside = x;
    inside[0] += (1 - 1e-9) * e.l * std::pow(e.r, 2.0 / a.bi(0));
    CHECK(contains(a, e, inside));

    AnisoRect r;
    r.center = x;
    r.half = vec({0.2, 0.3});
    Vec corner = vec({x[0] + 0.2, x[1] + 0.3});
    CHECK_FALSE(contains(r, corner));
}

TEST_CASE("scaling maps move families by parameter arithmetic") {
    Anisotropy a = make_anisotropy({1, 2}, 1.0);
    Vec origin = zero_vec(2);
    double r = 0.37, l = 1.3;

    // T_beta(r)(B_l) = E_{r,l} and T_max(r)(B_l) = E^max_{r,l}: the mapped
    // parameters match, and sampled membership transports pointwise.
    Region bl = euclid_ball(origin, l);
    Region e1 = scale_apply(a, t_beta(r), bl);
    const Ellipsoid& e1e = std::get<Ellipsoid>(e1);
    CHECK(e1e.kind == EllipsoidKind::E);
    CHECK(e1e.r == doctest::Approx(r).epsilon(1e-14));
    CHECK(e1e.l == doctest::Approx(l).epsilon(1e-14));

    Region em = scale_apply(a, t_max(a, r), bl);
    const Ellipsoid& eme = std::get<Ellipsoid>(em);
    CHECK(eme.r == doctest::Approx(std::pow(std::pow(r, a.b_max / 2.0), 2.0 / a.b_max) )
                       .epsilon(1e-12));  // sigma^{p/b_max} with p = b_max
    // Membership transport for all three maps on random points.
    Rng rng(7);
    std::vector<ScalingMap> maps = {t_beta(r), t_max(a, r), t_axis(a, 1, r)};
    for (const auto& m : maps) {
        Region img = scale_apply(a, m, bl);
        for (int k = 0; k < 200; ++k) {
            Vec y = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
            CHECK(contains(a, bl, y) == contains(a, img, map_apply(a, m, y)));
        }
        // det and volume agree.
        CHECK(volume(a, img) ==
              doctest::Approx(volume(a, bl) * map_det(a, m)).epsilon(1e-12));
    }
    CHECK(map_det(a, t_beta(r)) == doctest::Approx(std::pow(r, a.c)).epsilon(1e-13));
}

TEST_CASE("theta image under axis scaling follows the rescaling rule") {
    // T_j(r) multiplies the anisotropic norm by r^{b_j/2}.
    Anisotropy a = make_anisotropy({2, 3}, 0.5);
    double r = 0.6;
    Region th = theta_ball(zero_vec(2), 1.2);
    Region img = scale_apply(a, t_axis(a, 1, r), th);
    const Ellipsoid& e = std::get<Ellipsoid>(img);
    CHECK(e.kind == EllipsoidKind::Theta);
    CHECK(e.r == doctest::Approx(1.2 * std::pow(r, a.bi(1) / 2.0)).epsilon(1e-13));
}

TEST_CASE("frozen dilation constants") {
    uint64_t samples = 200000;
    CHECK(frak_C(iso22(), samples) == 2);
    CHECK(frak_C(make_anisotropy({1, 2}, 1.0), samples) == 2);
    CHECK(frak_C(make_anisotropy({1, 4}, 0.5), samples) == 4);
    CHECK(frak_C(make_anisotropy({2, 3, 4}, 0.5), samples) == 4);
}

TEST_CASE("equal exponents reduce to the closed-form constant") {
    for (double b : {2.0, 2.5, 3.0}) {
        Anisotropy a = make_anisotropy({b, b}, 0.5);
        CHECK(frak_C(a, 100000) == frak_C_equal_exponents(2, b));
    }
}

TEST_CASE("inclusion certificates") {
    Anisotropy a = make_anisotropy({1, 2}, 1.0);
    Vec x = vec({0.1, 0.2});
    Region small = ellipsoid_E(x, 0.5, 1.0);
    Region big = ellipsoid_E(x, 1.0, 1.0);

    InclusionReport ok = inclusion_check(a, small, big, 20000, 1);
    CHECK(ok.holds());
    CHECK(ok.tested == 20000);

    InclusionReport bad = inclusion_check(a, big, small, 20000, 2);
    CHECK_FALSE(bad.holds());
    REQUIRE(bad.witness.has_value());
    CHECK(contains(a, big, *bad.witness));
    CHECK_FALSE(contains(a, small, *bad.witness));

    CHECK(inclusion_check(a, big, big, 5000, 3).holds());
}

TEST_CASE("six fundamental relations on the catalog anisotropies") {
    std::vector<std::vector<double>> bs = {{2, 2}, {1, 2}, {1, 4}, {2, 3, 4}};
    for (const auto& b : bs) {
        Anisotropy a = make_anisotropy(b, 0.5 * 4.0 / *std::max_element(b.begin(), b.end()));
        int C = frak_C(a, 100000);
        auto checks = fundamental_geometry_checks(a, C, 100000, 99);
        for (const auto& rc : checks) {
            INFO(rc.name, " b0=", b[0]);
            CHECK(rc.report.violations == 0);
        }
    }
}

TEST_CASE("comparison rectangle sits inside its companion") {
    // Generation-k rectangles R with half-widths <= 2^{-C(k+1)} r^{2/b_i}
    // fit in the companion with half-widths (2^{-C k b_min/2} r)^{2/b_i};
    // pure exponent arithmetic.
    Anisotropy a = make_anisotropy({1, 3}, 0.4);
    int C = 3;
    double r = 0.8;
    for (int k = 0; k < 5; ++k) {
        for (int i = 0; i < a.n; ++i) {
            double half = std::pow(2.0, -C * (k + 1)) * std::pow(r, 2.0 / a.bi(i));
            double companion =
                std::pow(std::pow(2.0, -C * (a.b_min / 2.0) * k) * r, 2.0 / a.bi(i));
            CHECK(half <= companion * (1 + 1e-12));
        }
    }
}

TEST_CASE("volume formulas against Monte Carlo") {
    Anisotropy a = make_anisotropy({1, 2}, 1.0);
    std::vector<Region> regions = {ellipsoid_E(vec({0.2, -0.1}), 0.8, 1.3),
                                   ellipsoid_Emax(vec({0, 0}), 0.6, 1.0),
                                   theta_ball(vec({0.5, 0.5}), 0.9)};
    for (const auto& reg : regions) {
        VolumeEstimate est = mc_volume(a, reg, 2000000, 5);
        double exact = volume(a, reg);
        INFO("exact=", exact, " mc=", est.value, " se=", est.std_error);
        CHECK(std::fabs(est.value - exact) <= 3.0 * est.std_error + 1e-9);
    }
}

TEST_CASE("shell decomposition measures") {
    Anisotropy a = make_anisotropy({1, 4}, 0.5);
    Vec x = vec({0.3, 0.1});
    auto shells = shell_decomposition(a, x, 0.9, 6);
    REQUIRE(shells.size() == 6);
    double vb = unit_ball_volume(2);
    double total = 0;
    for (int k = 0; k < 6; ++k) {
        double rk = 0.9 * std::pow(2.0, -k);
        CHECK(shells[k].measure ==
              doctest::Approx(std::pow(rk, a.c) * (1 - std::pow(2.0, -a.c)) * vb).epsilon(1e-12));
        CHECK(shells[k].outer.r == doctest::Approx(rk));
        total += shells[k].measure;
    }
    double expected_total =
        (std::pow(0.9, a.c) - std::pow(0.9 * std::pow(2.0, -6), a.c)) * vb;
    CHECK(total == doctest::Approx(expected_total).epsilon(1e-12));
}

TEST_CASE("euclidean sandwich for theta balls") {
    Anisotropy a = make_anisotropy({1, 3}, 0.4);
    for (double r : {0.3, 1.0, 2.5}) {
        ThetaRadii tr = theta_euclid_sandwich(a, r);
        CHECK(tr.inner > 0);
        CHECK(tr.inner <= tr.outer);
        Region inner = euclid_ball(zero_vec(2), tr.inner);
        Region theta = theta_ball(zero_vec(2), r);
        Region outer = euclid_ball(zero_vec(2), tr.outer);
        CHECK(inclusion_check(a, inner, theta, 20000, 11).holds());
        CHECK(inclusion_check(a, theta, outer, 20000, 12).holds());
    }
}

TEST_CASE("annulus rule reproduces closed-form shell integrals") {
    for (auto& b : std::vector<std::vector<double>>{{2, 2}, {1, 2}, {1, 4}}) {
        Anisotropy a = make_anisotropy(b, 0.7 * 4.0 / *std::max_element(b.begin(), b.end()));
        AnnulusRule rule = make_annulus_rule(a, 10, 10);
        double theta1 = theta_unit_volume(a);
        double shell_vol = (std::pow(2.0, a.c) - 1.0) * theta1;
        CHECK(rule.measure == doctest::Approx(shell_vol).epsilon(1e-10));

        KernelMoments m = kernel_moments(a, rule);
        // A_shell = c |Theta_1| (1 - 2^{-s}) / s from the polar closed form.
        double a_shell_exact = a.c * theta1 * (1.0 - std::pow(2.0, -a.s)) / a.s;
        CHECK(m.A_shell == doctest::Approx(a_shell_exact).epsilon(1e-9));
        for (const auto& node : rule.nodes) {
            CHECK(node.w > 0);
            CHECK(node.rho == doctest::Approx(aniso_norm(a, node.z)).epsilon(1e-12));
            CHECK(node.rho > 1.0 - 1e-12);
            CHECK(node.rho < 2.0 + 1e-12);
        }
    }
}

TEST_CASE("annulus rule in three dimensions") {
    Anisotropy a = make_anisotropy({2, 3, 4}, 0.5);
    AnnulusRule rule = make_annulus_rule(a, 10, 10);
    double shell_vol = (std::pow(2.0, a.c) - 1.0) * theta_unit_volume(a);
    CHECK(rule.measure == doctest::Approx(shell_vol).epsilon(1e-7));
}
