#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anlg/kernel.hpp"

using namespace anlg;

TEST_CASE("bare kernel values and mode handling") {
    Anisotropy a = make_anisotropy({1, 2}, 1.0);
    Vec y = vec({0.5, -0.25});
    double rho = aniso_norm(a, y);
    CHECK(eval_K0(a, y) == doctest::Approx(std::pow(rho, -(a.c + a.s))).epsilon(1e-14));
    CHECK_THROWS_AS(eval_K0(a, zero_vec(2)), std::domain_error);

    KernelSpec ref = reference_kernel(a);
    CHECK(kernel_eval(ref, y) == doctest::Approx(a.q_max_s * eval_K0(a, y)).epsilon(1e-14));

    KernelSpec kb = bounded_kernel(a, 0.5, 2.0, [](const Vec& v) { return 1.5 + 0.25 * std::cos(v[0]); });
    CHECK(kernel_eval(kb, y) ==
          doctest::Approx((1.5 + 0.25 * std::cos(y[0])) * a.q_max_s * eval_K0(a, y))
              .epsilon(1e-14));
    CHECK(kernel_eval(kb, y) == doctest::Approx(kernel_eval(kb, -y)).epsilon(1e-14));
}

TEST_CASE("bathtub infimum against the radial closed form") {
    // For b=(2,2) the kernel is radial decreasing, so the optimal set of
    // measure delta inside B_2 is the annulus {rho0 < |y| < 2} with
    // rho0 = sqrt(4 - delta/pi) and integral 2 pi (rho0^{-s} - 2^{-s}) / s.
    double s = 1.0;
    Anisotropy a = make_anisotropy({2, 2}, s);
    for (double delta : {0.5, 2.0, 6.0}) {
        BathtubResult tub = bathtub_infimum(a, delta, 401);
        double rho0 = std::sqrt(4.0 - delta / M_PI);
        double exact = 2.0 * M_PI * (std::pow(rho0, -s) - std::pow(2.0, -s)) / s;
        INFO("delta=", delta, " got=", tub.value, " exact=", exact);
        CHECK(tub.value == doctest::Approx(exact).epsilon(0.02));
        CHECK_FALSE(tub.capped);
    }
}

TEST_CASE("bathtub bookkeeping") {
    Anisotropy a = make_anisotropy({2, 2}, 1.0);
    BathtubResult t1 = bathtub_infimum(a, 1.0, 201);
    BathtubResult t2 = bathtub_infimum(a, 2.0, 201);
    CHECK(t2.value > t1.value);  // more measure forces higher-kernel cells

    size_t full_cells = 0;
    for (uint8_t m : t1.mask) full_cells += m;
    CHECK(static_cast<double>(full_cells) * t1.cell_measure <= 1.0 + 1e-12);
    CHECK(static_cast<double>(full_cells + 1) * t1.cell_measure >= 1.0 - 1e-12);

    CHECK_THROWS_AS(bathtub_infimum(a, -1.0, 201), std::invalid_argument);
    CHECK_THROWS_AS(bathtub_infimum(a, 1.0, 1), std::invalid_argument);
    // Tiny delta below one cell's measure cannot be represented.
    CHECK_THROWS_AS(bathtub_infimum(a, 1e-12, 11), std::invalid_argument);
}

TEST_CASE("translation modulus against the 1d closed form") {
    // n=1, b=(2): K = q |y|^{-2} and for 0 < h < 1,
    //   int_{|y|>1} |K(y) - K(y-h)| dy / h = 2 q / (1 - h^2).
    Anisotropy a = make_anisotropy({2}, 1.0);
    KernelSpec k = reference_kernel(a);
    for (double h : {0.05, 0.1, 0.2}) {
        TranslationModulus tm = translation_modulus(k, vec({h}), 1.0);
        double exact = 2.0 * a.q_max_s / (1.0 - h * h);
        INFO("h=", h, " got=", tm.value, " exact=", exact, " tail=", tm.tail_bound);
        CHECK(tm.value == doctest::Approx(exact).epsilon(5e-3));
    }
}

TEST_CASE("translation modulus symmetry and preconditions") {
    Anisotropy a = make_anisotropy({1, 2}, 0.8);
    KernelSpec k = reference_kernel(a);
    TranslationModulus tp = translation_modulus(k, vec({0.1, 0.05}), 1.0);
    TranslationModulus tn = translation_modulus(k, vec({-0.1, -0.05}), 1.0);
    CHECK(tp.value == doctest::Approx(tn.value).epsilon(1e-10));
    CHECK(tp.value > 0);
    CHECK(std::isfinite(tp.value));

    CHECK_THROWS_AS(translation_modulus(k, vec({0.6, 0.0}), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(translation_modulus(k, vec({0.0, 0.0}), 1.0), std::invalid_argument);
}
