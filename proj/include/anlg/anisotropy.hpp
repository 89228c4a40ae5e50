#pragma once

#include "anlg/core.hpp"

namespace anlg {

/// Exponent vector b and order s of the anisotropic operator, together with
/// the derived quantities everything downstream keeps asking for:
///   |y|_b^2   = sum_i |y_i|^{b_i}          (the anisotropic norm, squared)
///   c         = sum_i 2/b_i                (homogeneous dimension)
///   q_max_s   = 4/b_max - s,  q_min_s = 4/b_min - s
/// The admissible range is 0 < s < 4/b_max.
struct Anisotropy {
    int n = 0;
    std::array<double, kMaxDim> b{};
    double s = 0;

    double c = 0;
    double b_min = 0;
    double b_max = 0;
    double q_max_s = 0;
    double q_min_s = 0;

    double bi(int i) const { return b[static_cast<size_t>(i)]; }
};

/// Validates and fills in the derived exponents.
/// Throws std::invalid_argument when b_i <= 0 or s is outside (0, 4/b_max).
Anisotropy make_anisotropy(const std::vector<double>& b, double s);

/// Anisotropic norm |y|_b = (sum |y_i|^{b_i})^{1/2}.
double aniso_norm(const Anisotropy& a, const Vec& y);
double aniso_norm_sq(const Anisotropy& a, const Vec& y);

/// Volume of the Euclidean unit ball in R^n.
double unit_ball_volume(int n);

/// Volume of the anisotropic ball Theta_1 = {|y|_b < 1}:
///   |Theta_1| = 2^{n+1} / (c * prod b_i) * prod Gamma(1/b_i) / Gamma(c/2).
double theta_unit_volume(const Anisotropy& a);

}  // namespace anlg
