#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anlg/barriers.hpp"
#include "anlg/regularity.hpp"

using namespace anlg;

namespace {

KernelSpec ref_kernel(std::vector<double> b, double s) {
    return reference_kernel(make_anisotropy(b, s));
}

GridFunction solved_1d(const std::function<double(const Vec&)>& g, double half, int nodes,
                       const KernelSpec& k) {
    SolveReport rep = solve(assemble(make_cube_grid(1, half, nodes), g, k));
    REQUIRE(rep.converged);
    return rep.solution;
}

}  // namespace

TEST_CASE("fit_decay: exact power law, ordering, validation") {
    std::vector<double> scales = {0.1, 0.4, 0.2, 0.8};
    std::vector<double> values;
    for (double s : scales) values.push_back(3.0 * std::pow(s, 1.7));
    DecayReport rep = fit_decay(scales, values);
    CHECK(rep.exponent == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(rep.residual < 1e-12);
    CHECK(rep.usable == 4);
    for (size_t i = 1; i < rep.scales.size(); ++i) CHECK(rep.scales[i] < rep.scales[i - 1]);

    CHECK_THROWS_AS(fit_decay({1, 1}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_decay({1, -2}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_decay({1, 2}, {1}), std::invalid_argument);
    CHECK(fit_decay({1, 2, 4}, {0, 0, 0}).degenerate);
}

TEST_CASE("oscillation decay: constant field is degenerate and passes") {
    GridFunction u = make_cube_grid(2, 1.0, 41);
    fill_grid(u, [](const Vec&) { return 5.0; });
    DecayReport rep = de_giorgi_iteration(u, make_anisotropy({2, 2}, 1.0), zero_vec(2), 0.4);
    CHECK(rep.degenerate);
    CHECK(rep.pass);
}

TEST_CASE("oscillation decay: affine field fits the linear rate") {
    GridFunction u = make_cube_grid(1, 1.0, 1601);
    fill_grid(u, [](const Vec& x) { return 0.3 + 0.8 * x[0]; });
    DeGiorgiOptions opt;
    opt.num_scales = 5;
    DecayReport rep = de_giorgi_iteration(u, make_anisotropy({2}, 1.0), zero_vec(1), 0.4, opt);
    CHECK(rep.pass);
    CHECK(rep.exponent == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.usable >= 4);
}

TEST_CASE("oscillation decay: unresolved scales raise insufficient data") {
    GridFunction u = make_cube_grid(1, 1.0, 21);
    fill_grid(u, [](const Vec& x) { return x[0]; });
    DeGiorgiOptions opt;
    opt.num_scales = 6;
    CHECK_THROWS_AS(de_giorgi_iteration(u, make_anisotropy({2}, 1.0), zero_vec(1), 0.15, opt),
                    std::runtime_error);
}

TEST_CASE("oscillation decay on a solved instance is a clean power law") {
    KernelSpec k = ref_kernel({2}, 1.0);
    auto g = [](const Vec& y) { return std::exp(-sq(y[0])) * (1.0 + 0.5 * std::sin(3 * y[0])); };
    GridFunction u = solved_1d(g, 1.0, 201, k);
    DeGiorgiOptions opt;
    opt.num_scales = 6;
    DecayReport rep = de_giorgi_iteration(u, k.a, zero_vec(1), 0.3, opt);
    CHECK(rep.pass);
    CHECK(rep.exponent > 0.3);
}

TEST_CASE("growth lemma: zero function holds with full margin") {
    GridFunction u = make_cube_grid(2, 1.2, 49);
    KernelSpec k = ref_kernel({2, 2}, 1.0);
    GrowthReport rep = growth_lemma_check(u, k, 0.5 * unit_ball_volume(2), 0.9, 0.3);
    CHECK(rep.hypotheses_ok);
    CHECK(rep.failed_hypothesis == 0);
    CHECK(rep.holds);
    CHECK(rep.margin == doctest::Approx(1.0));
    CHECK(rep.zero_measure > 0.5 * unit_ball_volume(2));
}

TEST_CASE("growth lemma: all-ones field trips the zero-set hypothesis") {
    GridFunction u = make_cube_grid(2, 1.2, 49);
    fill_grid(u, [](const Vec&) { return 1.0; });
    u.exterior_const = 1.0;
    KernelSpec k = ref_kernel({2, 2}, 1.0);
    GrowthReport rep = growth_lemma_check(u, k, 0.1, 0.5, 0.3);
    CHECK_FALSE(rep.hypotheses_ok);
    CHECK(rep.failed_hypothesis == 4);
    CHECK_FALSE(rep.holds);
}

TEST_CASE("growth lemma: concave cap trips the subsolution hypothesis") {
    GridFunction u = make_cube_grid(2, 1.2, 49);
    fill_grid(u, [](const Vec& x) { return 1.0 - 4.0 * euclid_norm_sq(x); });
    u.exterior_const = -1.0;
    KernelSpec k = ref_kernel({2, 2}, 1.0);
    GrowthReport rep = growth_lemma_check(u, k, 0.1, 0.5, 0.3);
    CHECK(rep.failed_hypothesis == 1);
    CHECK(rep.hypothesis_margin[0] < 0);
}

TEST_CASE("growth lemma margins shrink as the zero set shrinks") {
    KernelSpec k = ref_kernel({2}, 1.0);
    SilvestreCertificate cert = find_kappa_tau(k.a, 0.5);
    REQUIRE(cert.certified);

    auto data = [](double c) {
        return [c](const Vec& y) { return y[0] > 0 ? 1.0 : -c; };
    };
    GrowthOptions opt;
    opt.subsolution_tol = 1e-3;

    std::array<double, 3> cs = {1.0, 0.5, 0.25};
    std::array<double, 3> margins{};
    std::array<double, 3> zeros{};
    for (size_t i = 0; i < 3; ++i) {
        GridFunction u = solved_1d(data(cs[i]), 1.2, 241, k);
        GrowthReport rep = growth_lemma_check(u, k, 0.01, 0.02, cert.last.tau, opt);
        CHECK(rep.hypotheses_ok);
        CHECK(rep.holds);
        margins[i] = rep.margin;
        zeros[i] = rep.zero_measure;
    }
    // Larger negative data -> fatter zero set -> larger gap below 1.
    CHECK(zeros[0] > zeros[1]);
    CHECK(zeros[1] > zeros[2]);
    CHECK(margins[0] >= margins[1]);
    CHECK(margins[1] >= margins[2]);
}

TEST_CASE("harnack quotient: constant data gives ratio one, scaling leaves it fixed") {
    KernelSpec k = ref_kernel({2}, 1.0);
    HarnackReport one = harnack_ratio([](const Vec&) { return 1.0; }, k);
    CHECK(one.converged);
    CHECK(one.ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(one.sup_half == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(one.inf_clamped);

    auto g = [](const Vec& y) { return 0.3 + (y[0] > 1.5 && y[0] < 3.0 ? 1.0 : 0.0); };
    HarnackReport base = harnack_ratio(g, k);
    HarnackReport scaled = harnack_ratio([&](const Vec& y) { return 5.0 * g(y); }, k);
    CHECK(base.converged);
    CHECK(scaled.converged);
    CHECK(scaled.ratio == doctest::Approx(base.ratio).epsilon(1e-9));
    CHECK(scaled.sup_half == doctest::Approx(5.0 * base.sup_half).epsilon(1e-7));
}

TEST_CASE("distribution decay: synthetic inverse power fits its exact tail exponent") {
    GridFunction u = make_cube_grid(2, 1.2, 161);
    fill_grid(u, [](const Vec& x) {
        const double r = euclid_norm(x);
        return r == 0 ? 3.0 : std::min(3.0, 1.0 / std::sqrt(r));
    });
    // {u >= t} = {|x| <= t^-2}, so the B_1 measure is pi t^-4 for t >= 1.
    DecayReport rep = point_estimate_decay(u, {1.0, 1.3, 1.6, 2.0, 2.5});
    CHECK(rep.pass);
    CHECK(rep.exponent == doctest::Approx(-4.0).epsilon(0.12));

    GridFunction zero = make_cube_grid(2, 1.2, 31);
    CHECK(point_estimate_decay(zero, {0.5, 1.0}).degenerate);

    GridFunction capped = make_cube_grid(2, 1.2, 31);
    fill_grid(capped, [](const Vec& x) { return std::max(0.0, 1.0 - euclid_norm_sq(x)); });
    DecayReport c = point_estimate_decay(capped, {0.5, 2.0});
    CHECK(c.values[0] == 0.0);  // nothing above t = 2 when u <= 1
    CHECK_FALSE(c.pass);
}

TEST_CASE("liouville probe: receding dipole influence decays monotonically") {
    KernelSpec k = ref_kernel({2}, 1.0);
    LiouvilleOptions opt;
    opt.nodes = 101;
    DecayReport rep = liouville_probe(k, {4, 8, 16, 32}, opt);
    CHECK(rep.pass);
    CHECK(rep.exponent < -0.4);
    // Scales are stored decreasing, so oscillation grows along the vector.
    for (size_t i = 1; i < rep.values.size(); ++i) CHECK(rep.values[i] > rep.values[i - 1]);

    CHECK_THROWS_AS(liouville_probe(k, {1.0}, opt), std::invalid_argument);
}

TEST_CASE("holder fit: anisotropic square root hits one half in its own metric") {
    Anisotropy a = make_anisotropy({1, 2}, 0.5);
    GridFunction u = make_cube_grid(2, 1.0, 161);
    fill_grid(u, [&](const Vec& x) { return std::sqrt(aniso_norm(a, x)); });

    HolderReport aniso = holder_fit(u, a, zero_vec(2), 0.9, HolderMetric::Aniso);
    HolderReport euclid = holder_fit(u, a, zero_vec(2), 0.9, HolderMetric::Euclid);
    CHECK(aniso.exponent == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::fabs(aniso.exponent - 0.5) < 0.05);
    CHECK(euclid.exponent < aniso.exponent);
    // Metric conversion: the anisotropic exponent dominates b_min/2 times the
    // Euclidean one.
    CHECK(aniso.exponent >= 0.5 * euclid.exponent - 0.05);
    CHECK(aniso.seminorm > 0);
}

TEST_CASE("holder fit: affine caps at one, steps flatten, constants degenerate") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    GridFunction u = make_cube_grid(2, 1.0, 81);
    fill_grid(u, [](const Vec& x) { return 1.0 + 2.0 * x[0] - x[1]; });
    HolderReport aff = holder_fit(u, a, zero_vec(2), 0.9, HolderMetric::Euclid);
    CHECK(aff.exponent == 1.0);
    CHECK(aff.exponent_raw >= 0.97);
    CHECK(aff.seminorm > 0);
    CHECK(std::isfinite(aff.seminorm));

    GridFunction step = make_cube_grid(2, 1.0, 81);
    fill_grid(step, [](const Vec& x) { return x[0] > 0 ? 1.0 : -1.0; });
    HolderReport st = holder_fit(step, a, zero_vec(2), 0.9, HolderMetric::Euclid);
    CHECK(st.exponent < 0.1);

    GridFunction flat = make_cube_grid(2, 1.0, 81);
    fill_grid(flat, [](const Vec&) { return 2.0; });
    CHECK(holder_fit(flat, a, zero_vec(2), 0.9, HolderMetric::Euclid).degenerate);
}

TEST_CASE("holder fit: scale invariance and bitwise reproducibility") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    GridFunction u = make_cube_grid(2, 1.0, 81);
    fill_grid(u, [](const Vec& x) { return std::sqrt(euclid_norm(x)); });

    HolderReport r1 = holder_fit(u, a, zero_vec(2), 0.9, HolderMetric::Euclid);
    HolderReport r2 = holder_fit(u, a, zero_vec(2), 0.9, HolderMetric::Euclid);
    CHECK(r1.exponent == r2.exponent);
    CHECK(r1.seminorm == r2.seminorm);

    GridFunction v = u;
    for (double& x : v.values) x *= 3.0;
    HolderReport r3 = holder_fit(v, a, zero_vec(2), 0.9, HolderMetric::Euclid);
    CHECK(r3.exponent == doctest::Approx(r1.exponent).epsilon(1e-9));
    CHECK(r3.seminorm == doctest::Approx(3.0 * r1.seminorm).epsilon(1e-9));
}

TEST_CASE("gradient holder fit: quadratic caps at one, affine degenerates") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    GridFunction u = make_cube_grid(2, 1.0, 81);
    fill_grid(u, [](const Vec& x) { return sq(x[0]) - 0.5 * sq(x[1]) + x[0] * x[1]; });
    HolderReport quad = gradient_holder_fit(u, a, zero_vec(2), 0.9, HolderMetric::Euclid);
    CHECK(quad.exponent == 1.0);

    GridFunction aff = make_cube_grid(2, 1.0, 81);
    fill_grid(aff, [](const Vec& x) { return 3.0 * x[0] - x[1]; });
    CHECK(gradient_holder_fit(aff, a, zero_vec(2), 0.9, HolderMetric::Euclid).degenerate);
}
