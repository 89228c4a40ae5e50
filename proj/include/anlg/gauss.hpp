#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace anlg {

struct Rule1D {
    std::vector<double> x;  // nodes
    std::vector<double> w;  // weights
};

/// Gauss-Legendre rule on [-1,1], nodes by Newton iteration on P_m.
/// Accurate to machine precision for any practical order.
inline Rule1D gauss_legendre(int m) {
    if (m < 1 || m > 128) throw std::invalid_argument("gauss_legendre: order out of range");
    Rule1D r;
    r.x.resize(static_cast<size_t>(m));
    r.w.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        // Chebyshev initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = 0;
            for (int j = 0; j < m; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = m * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        r.x[static_cast<size_t>(m - 1 - i)] = x;
        r.w[static_cast<size_t>(m - 1 - i)] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

/// Same rule shifted to [a,b].
inline Rule1D gauss_legendre_ab(int m, double a, double b) {
    Rule1D r = gauss_legendre(m);
    double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (size_t i = 0; i < r.x.size(); ++i) {
        r.x[i] = mid + hw * r.x[i];
        r.w[i] *= hw;
    }
    return r;
}

}  // namespace anlg
