#include "anlg/anisotropy.hpp"

#include <algorithm>
#include <numbers>

namespace anlg {

Anisotropy make_anisotropy(const std::vector<double>& b, double s) {
    if (b.empty() || b.size() > kMaxDim)
        throw std::invalid_argument("make_anisotropy: dimension must be 1.." + std::to_string(kMaxDim));
    Anisotropy a;
    a.n = static_cast<int>(b.size());
    a.b_min = b[0];
    a.b_max = b[0];
    for (int i = 0; i < a.n; ++i) {
        double bi = b[static_cast<size_t>(i)];
        if (!(bi > 0.0)) throw std::invalid_argument("make_anisotropy: exponents must be positive");
        a.b[static_cast<size_t>(i)] = bi;
        a.b_min = std::min(a.b_min, bi);
        a.b_max = std::max(a.b_max, bi);
        a.c += 2.0 / bi;
    }
    if (!(s > 0.0) || !(s < 4.0 / a.b_max))
        throw std::invalid_argument("make_anisotropy: s must lie in (0, 4/b_max)");
    a.s = s;
    a.q_max_s = 4.0 / a.b_max - s;
    a.q_min_s = 4.0 / a.b_min - s;
    return a;
}

double aniso_norm_sq(const Anisotropy& a, const Vec& y) {
    double t = 0;
    for (int i = 0; i < a.n; ++i) t += abs_pow(y[i], a.bi(i));
    return t;
}

double aniso_norm(const Anisotropy& a, const Vec& y) { return std::sqrt(aniso_norm_sq(a, y)); }

double unit_ball_volume(int n) {
    double ns = static_cast<double>(n);
    return std::pow(std::numbers::pi, ns / 2.0) / std::tgamma(ns / 2.0 + 1.0);
}

double theta_unit_volume(const Anisotropy& a) {
    double prod_b = 1, prod_g = 1;
    for (int i = 0; i < a.n; ++i) {
        prod_b *= a.bi(i);
        prod_g *= std::tgamma(1.0 / a.bi(i));
    }
    return std::pow(2.0, a.n + 1) / (a.c * prod_b) * prod_g / std::tgamma(a.c / 2.0);
}

}  // namespace anlg
