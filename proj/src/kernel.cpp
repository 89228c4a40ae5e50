#include "anlg/kernel.hpp"

#include <algorithm>
#include <numeric>

#include "anlg/gauss.hpp"

namespace anlg {

KernelSpec reference_kernel(const Anisotropy& a) {
    KernelSpec k;
    k.a = a;
    k.mode = KernelMode::Reference;
    return k;
}

KernelSpec bounded_kernel(const Anisotropy& a, double lambda, double Lambda,
                          std::function<double(const Vec&)> multiplier) {
    if (!(0 < lambda && lambda <= Lambda))
        throw std::invalid_argument("bounded_kernel: need 0 < lambda <= Lambda");
    KernelSpec k;
    k.a = a;
    k.mode = KernelMode::Bounded;
    k.lambda = lambda;
    k.Lambda = Lambda;
    k.multiplier = std::move(multiplier);
    return k;
}

double eval_K0(const Anisotropy& a, const Vec& y) {
    double nrm = aniso_norm(a, y);
    if (nrm == 0.0) throw std::domain_error("eval_K0: kernel is singular at the origin");
    return std::pow(nrm, -(a.c + a.s));
}

double kernel_eval_with_norm(const KernelSpec& k, const Vec& y, double nrm) {
    if (nrm == 0.0) throw std::domain_error("kernel_eval: singular at the origin");
    double k0 = std::pow(nrm, -(k.a.c + k.a.s));
    double v = k.a.q_max_s * k0;
    switch (k.mode) {
        case KernelMode::Reference:
            return v;
        case KernelMode::Bounded:
            return k.multiplier(y) * v;
        case KernelMode::Truncated: {
            double base = k.multiplier ? k.multiplier(y) * v : v;
            return base + (k.l1_tail ? k.l1_tail(y) : 0.0);
        }
    }
    return v;
}

double kernel_eval(const KernelSpec& k, const Vec& y) {
    return kernel_eval_with_norm(k, y, aniso_norm(k.a, y));
}

// ---------------------------------------------------------------------------

BathtubResult bathtub_infimum(const Anisotropy& a, double delta, int resolution) {
    if (!(delta > 0)) throw std::invalid_argument("bathtub_infimum: delta must be positive");
    if (resolution < 2 || a.n > 3)
        throw std::invalid_argument("bathtub_infimum: bad resolution or dimension");
    const int n = a.n;
    const double h = 4.0 / resolution;
    double cell = std::pow(h, n);
    if (delta < cell)
        throw std::invalid_argument("bathtub_infimum: resolution too coarse to represent delta");

    size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<size_t>(resolution);

    struct Cand {
        double k0;
        size_t idx;
    };
    std::vector<Cand> cands;
    cands.reserve(total);
    bool has_singular = false;

    for (size_t idx = 0; idx < total; ++idx) {
        size_t rem = idx;
        Vec ctr = zero_vec(n);
        for (int i = n - 1; i >= 0; --i) {
            size_t j = rem % static_cast<size_t>(resolution);
            rem /= static_cast<size_t>(resolution);
            ctr[i] = -2.0 + (static_cast<double>(j) + 0.5) * h;
        }
        if (!(euclid_norm(ctr) < 2.0)) continue;
        double nrm = aniso_norm(a, ctr);
        if (nrm == 0.0) {
            has_singular = true;
            continue;
        }
        cands.push_back({std::pow(nrm, -(a.c + a.s)), idx});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        return x.k0 != y.k0 ? x.k0 < y.k0 : x.idx < y.idx;
    });

    BathtubResult res;
    res.delta = delta;
    res.resolution = resolution;
    res.cell_measure = cell;
    res.mask.assign(total, 0);

    double acc = 0;
    for (const Cand& c : cands) {
        if (acc + cell <= delta) {
            res.value += c.k0 * cell;
            res.mask[c.idx] = 1;
            acc += cell;
            if (acc == delta) break;
        } else {
            res.value += c.k0 * (delta - acc);
            acc = delta;
            break;
        }
    }
    if (acc < delta) {
        res.capped = true;
        res.singular_excluded = has_singular;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Closed-form tail of the bare kernel:
//   int_{|y|_b > rho} K0 = C_tail(a) * rho^{-s} / s,   C_tail = c * |Theta_1|.
// (Anisotropic polar coordinates make the radial integrand exactly r^{-1-s}.)

double k0_tail_mass(const Anisotropy& a, double rho) {
    return a.c * theta_unit_volume(a) * std::pow(rho, -a.s) / a.s;
}

namespace {

// Euclidean angular rule: list of (unit direction, surface weight).
struct AngularRule {
    std::vector<Vec> dir;
    std::vector<double> w;
};

AngularRule angular_rule(int n, int order) {
    AngularRule ar;
    if (n == 1) {
        ar.dir = {vec({1.0}), vec({-1.0})};
        ar.w = {1.0, 1.0};
        return ar;
    }
    if (n == 2) {
        // Quadrant panels avoid the axis kinks of |y_i|^{b_i}.
        for (int q = 0; q < 4; ++q) {
            Rule1D g = gauss_legendre_ab(order, q * M_PI / 2.0, (q + 1) * M_PI / 2.0);
            for (size_t i = 0; i < g.x.size(); ++i) {
                ar.dir.push_back(vec({std::cos(g.x[i]), std::sin(g.x[i])}));
                ar.w.push_back(g.w[i]);
            }
        }
        return ar;
    }
    // n == 3: z = cos(phi) panels split at the equator, theta quadrants.
    for (int hz = 0; hz < 2; ++hz) {
        Rule1D gz = gauss_legendre_ab(order, hz == 0 ? -1.0 : 0.0, hz == 0 ? 0.0 : 1.0);
        for (int q = 0; q < 4; ++q) {
            Rule1D gt = gauss_legendre_ab(order, q * M_PI / 2.0, (q + 1) * M_PI / 2.0);
            for (size_t iz = 0; iz < gz.x.size(); ++iz) {
                double z = gz.x[iz];
                double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                for (size_t it = 0; it < gt.x.size(); ++it) {
                    ar.dir.push_back(vec({rho * std::cos(gt.x[it]), rho * std::sin(gt.x[it]), z}));
                    ar.w.push_back(gz.w[iz] * gt.w[it]);
                }
            }
        }
    }
    return ar;
}

}  // namespace

TranslationModulus translation_modulus(const KernelSpec& k, const Vec& h, double tau0,
                                       const TranslationOptions& opts) {
    const Anisotropy& a = k.a;
    if (h.n != a.n) throw std::invalid_argument("translation_modulus: dimension mismatch");
    double habs = euclid_norm(h);
    if (!(habs > 0) || !(habs < tau0 / 2.0))
        throw std::invalid_argument("translation_modulus: need 0 < |h| < tau0/2");

    AngularRule ar = angular_rule(a.n, opts.angular_order);
    double lam_hi = (k.mode == KernelMode::Reference) ? 1.0 : k.Lambda;

    TranslationModulus out;
    double R = tau0;
    for (int blk = 0; blk < opts.max_blocks; ++blk) {
        double R2 = 2.0 * R;
        Rule1D gr = gauss_legendre_ab(opts.radial_order, R, R2);
        double block = 0;
        for (size_t ir = 0; ir < gr.x.size(); ++ir) {
            double r = gr.x[ir];
            double rn = std::pow(r, a.n - 1);
            for (size_t id = 0; id < ar.dir.size(); ++id) {
                Vec y = r * ar.dir[id];
                double f = std::fabs(kernel_eval(k, y) - kernel_eval(k, y - h)) / habs;
                block += gr.w[ir] * ar.w[id] * rn * f;
            }
        }
        out.quadrature += block;
        ++out.blocks;
        R = R2;

        // |y| >= R forces |y|_b >= (R/sqrt(n))^{b_min/2} once R >= sqrt(n).
        if (R >= std::sqrt(static_cast<double>(a.n))) {
            double rho = std::pow(R / std::sqrt(static_cast<double>(a.n)), a.b_min / 2.0);
            double tb = 2.0 * lam_hi * a.q_max_s * k0_tail_mass(a, rho) / habs;
            if (tb < opts.rel_tol * std::max(out.quadrature, 1e-300)) {
                out.tail_bound = tb;
                break;
            }
        }
    }
    out.value = out.quadrature + out.tail_bound;
    return out;
}

}  // namespace anlg
