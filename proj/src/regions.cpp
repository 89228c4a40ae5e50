#include "anlg/regions.hpp"

#include <algorithm>
#include <cmath>

namespace anlg {

AnisoRect comparison_rect(const Anisotropy& a, const Vec& x, double r, double l) {
    AnisoRect rect;
    rect.center = x;
    rect.half = zero_vec(a.n);
    double lf = std::pow(l, 2.0 / a.b_min);
    for (int i = 0; i < a.n; ++i) rect.half[i] = lf * std::pow(r, 2.0 / a.bi(i));
    return rect;
}

bool contains(const Anisotropy& a, const Ellipsoid& e, const Vec& y) {
    switch (e.kind) {
        case EllipsoidKind::Theta: {
            Vec d = y - e.center;
            return aniso_norm_sq(a, d) < e.r * e.r;
        }
        case EllipsoidKind::E: {
            double q = 0;
            for (int i = 0; i < a.n; ++i)
                q += sq(y[i] - e.center[i]) / std::pow(e.r, 4.0 / a.bi(i));
            return q < e.l * e.l;
        }
        case EllipsoidKind::Emax: {
            double q = 0;
            for (int i = 0; i < a.n; ++i)
                q += sq(y[i] - e.center[i]) / std::pow(e.r, 2.0 * a.b_max / a.bi(i));
            return q < e.l * e.l;
        }
    }
    return false;
}

bool contains(const AnisoRect& r, const Vec& y) {
    for (int i = 0; i < r.center.n; ++i)
        if (!(std::fabs(y[i] - r.center[i]) < r.half[i])) return false;
    return true;
}

bool contains(const Anisotropy& a, const Region& reg, const Vec& y) {
    if (const auto* e = std::get_if<Ellipsoid>(&reg)) return contains(a, *e, y);
    return contains(std::get<AnisoRect>(reg), y);
}

double volume(const Anisotropy& a, const Region& reg) {
    if (const auto* e = std::get_if<Ellipsoid>(&reg)) {
        switch (e->kind) {
            case EllipsoidKind::E:
                return std::pow(e->r, a.c) * std::pow(e->l, a.n) * unit_ball_volume(a.n);
            case EllipsoidKind::Emax:
                return std::pow(e->r, a.c * a.b_max / 2.0) * std::pow(e->l, a.n) *
                       unit_ball_volume(a.n);
            case EllipsoidKind::Theta:
                return std::pow(e->r, a.c) * theta_unit_volume(a);
        }
    }
    const auto& r = std::get<AnisoRect>(reg);
    double v = 1;
    for (int i = 0; i < r.center.n; ++i) v *= 2.0 * r.half[i];
    return v;
}

Vec bounding_half_widths(const Anisotropy& a, const Region& reg) {
    Vec h = zero_vec(a.n);
    if (const auto* e = std::get_if<Ellipsoid>(&reg)) {
        for (int i = 0; i < a.n; ++i) {
            switch (e->kind) {
                case EllipsoidKind::E:
                    h[i] = e->l * std::pow(e->r, 2.0 / a.bi(i));
                    break;
                case EllipsoidKind::Emax:
                    h[i] = e->l * std::pow(e->r, a.b_max / a.bi(i));
                    break;
                case EllipsoidKind::Theta:
                    // |y_i|^{b_i} < r^2 on Theta_r
                    h[i] = std::pow(e->r, 2.0 / a.bi(i));
                    break;
            }
        }
        return h;
    }
    return std::get<AnisoRect>(reg).half;
}

Vec region_center(const Region& reg) {
    if (const auto* e = std::get_if<Ellipsoid>(&reg)) return e->center;
    return std::get<AnisoRect>(reg).center;
}

ScalingMap t_beta(double sigma) { return {2.0, sigma}; }
ScalingMap t_max(const Anisotropy& a, double sigma) { return {a.b_max, sigma}; }
ScalingMap t_axis(const Anisotropy& a, int j, double sigma) {
    if (j < 0 || j >= a.n) throw std::invalid_argument("t_axis: bad axis");
    return {a.bi(j), sigma};
}

Vec map_apply(const Anisotropy& a, const ScalingMap& m, const Vec& y) {
    Vec r = y;
    for (int i = 0; i < a.n; ++i) r[i] *= std::pow(m.sigma, m.p / a.bi(i));
    return r;
}

Vec map_apply_inverse(const Anisotropy& a, const ScalingMap& m, const Vec& y) {
    Vec r = y;
    for (int i = 0; i < a.n; ++i) r[i] /= std::pow(m.sigma, m.p / a.bi(i));
    return r;
}

double map_det(const Anisotropy& a, const ScalingMap& m) {
    return std::pow(m.sigma, m.p * a.c / 2.0);
}

Region scale_apply(const Anisotropy& a, const ScalingMap& m, const Region& reg) {
    // sigma^{p/b_i} composed with each family's own per-axis profile stays in
    // the family; only the scale parameter moves.
    if (const auto* e = std::get_if<Ellipsoid>(&reg)) {
        Ellipsoid out = *e;
        out.center = map_apply(a, m, e->center);
        switch (e->kind) {
            case EllipsoidKind::E:
                out.r = e->r * std::pow(m.sigma, m.p / 2.0);
                break;
            case EllipsoidKind::Emax:
                out.r = e->r * std::pow(m.sigma, m.p / a.b_max);
                break;
            case EllipsoidKind::Theta:
                out.r = e->r * std::pow(m.sigma, m.p / 2.0);
                break;
        }
        return out;
    }
    const auto& r = std::get<AnisoRect>(reg);
    AnisoRect out;
    out.center = map_apply(a, m, r.center);
    out.half = zero_vec(a.n);
    for (int i = 0; i < a.n; ++i) out.half[i] = r.half[i] * std::pow(m.sigma, m.p / a.bi(i));
    return out;
}

Vec sample_region(const Anisotropy& a, const Region& reg, LatticeSampler& lat, Rng& rng) {
    Vec half = bounding_half_widths(a, reg);
    Vec ctr = region_center(reg);
    // Lattice points fill the box; rejection keeps the in-region ones.  The
    // occasional rng draw breaks the lattice alignment when acceptance is low.
    for (int tries = 0; tries < 1 << 20; ++tries) {
        Vec u = lat.next();
        Vec y = zero_vec(a.n);
        for (int i = 0; i < a.n; ++i) y[i] = ctr[i] + (2.0 * u[i] - 1.0) * half[i];
        if (contains(a, reg, y)) return y;
        if ((tries & 1023) == 1023) lat.shift[0] = rng.next_double();
    }
    throw std::runtime_error("sample_region: rejection sampling failed to hit the region");
}

// Fixed number of logical sample streams, independent of the thread budget,
// so results do not depend on how many threads actually run.
constexpr size_t kSampleStreams = 16;

InclusionReport inclusion_check(const Anisotropy& a, const Region& A, const Region& B,
                                uint64_t samples, uint64_t seed) {
    InclusionReport rep;
    const size_t workers = kSampleStreams;
    std::vector<InclusionReport> slot(workers);
    std::vector<uint64_t> counts(workers, samples / workers);
    counts[0] += samples % workers;

    parallel_for(workers, [&](size_t wb, size_t we) {
        for (size_t w = wb; w < we; ++w) {
            LatticeSampler lat(a.n, seed + 7919 * w);
            Rng rng(seed ^ (0xabcdull + w));
            InclusionReport& r = slot[w];
            for (uint64_t k = 0; k < counts[w]; ++k) {
                Vec y = sample_region(a, A, lat, rng);
                ++r.tested;
                if (!contains(a, B, y)) {
                    ++r.violations;
                    if (!r.witness) r.witness = y;
                }
            }
        }
    });
    for (const auto& r : slot) {
        rep.tested += r.tested;
        rep.violations += r.violations;
        if (!rep.witness && r.witness) rep.witness = r.witness;
    }
    return rep;
}

VolumeEstimate mc_volume(const Anisotropy& a, const Region& reg, uint64_t samples, uint64_t seed) {
    Vec half = bounding_half_widths(a, reg);
    Vec ctr = region_center(reg);
    double box = 1;
    for (int i = 0; i < a.n; ++i) box *= 2.0 * half[i];

    const size_t workers = kSampleStreams;
    std::vector<uint64_t> hits(workers, 0);
    std::vector<uint64_t> counts(workers, samples / workers);
    counts[0] += samples % workers;

    parallel_for(workers, [&](size_t wb, size_t we) {
        for (size_t w = wb; w < we; ++w) {
            LatticeSampler lat(a.n, seed + 104729 * w);
            for (uint64_t k = 0; k < counts[w]; ++k) {
                Vec u = lat.next();
                Vec y = zero_vec(a.n);
                for (int i = 0; i < a.n; ++i) y[i] = ctr[i] + (2.0 * u[i] - 1.0) * half[i];
                if (contains(a, reg, y)) ++hits[w];
            }
        }
    });
    uint64_t hit = 0;
    for (uint64_t h : hits) hit += h;
    double p = static_cast<double>(hit) / static_cast<double>(samples);
    VolumeEstimate est;
    est.value = box * p;
    est.std_error = box * std::sqrt(std::max(p * (1.0 - p), 1e-300) / static_cast<double>(samples));
    return est;
}

int frak_C(const Anisotropy& a, uint64_t samples, uint64_t seed) {
    Vec origin = zero_vec(a.n);
    double rootn = std::sqrt(static_cast<double>(a.n));
    for (int C = 1; C <= 64; ++C) {
        double Cd = static_cast<double>(C);
        bool ok = true;
        {
            Region A = theta_ball(origin, rootn);
            Region B = ellipsoid_E(origin, Cd, 1.0);
            ok = inclusion_check(a, A, B, samples, seed + 11 * C).holds();
        }
        if (ok) {
            Region A = ellipsoid_E(origin, std::pow(2.0, -Cd), 1.0);
            Region B = ellipsoid_E(origin, 1.0, 0.25);
            ok = inclusion_check(a, A, B, samples, seed + 13 * C).holds();
        }
        if (ok) {
            double l = std::pow(2.0, -Cd * a.b_min / 2.0);
            Region A = ellipsoid_E(origin, l, 1.0);
            Region B = ellipsoid_E(origin, 1.0, 0.5);
            ok = inclusion_check(a, A, B, samples, seed + 17 * C).holds();
        }
        if (ok) return C;
    }
    throw std::runtime_error("frak_C: no certificate found up to C = 64");
}

std::vector<RelationCheck> fundamental_geometry_checks(const Anisotropy& a, int C,
                                                       uint64_t samples, uint64_t seed) {
    const int configs = 8;
    double rootn = std::sqrt(static_cast<double>(a.n));
    double cmax = std::pow(static_cast<double>(a.n), a.b_max / 4.0);
    double Cd = static_cast<double>(C);

    std::vector<RelationCheck> out(6);
    out[0].name = "E(r,1) in Theta(r sqrt n)";
    out[1].name = "Theta(r sqrt n) in E(rC,1)";
    out[2].name = "E(2^-C r,1) in E(r,1/4)";
    out[3].name = "R(r,l) in E(rl n^(bmax/4),1)";
    out[4].name = "Emax(r/2,1) in Emax(r,1/2)";
    out[5].name = "Emax(r,l) in Emax(rl,1), l>=1";

    Rng rng(seed);
    for (int cfg = 0; cfg < configs; ++cfg) {
        Vec x = zero_vec(a.n);
        for (int i = 0; i < a.n; ++i) x[i] = rng.uniform(-1.0, 1.0);
        double r = std::exp(rng.uniform(std::log(0.05), std::log(3.0)));
        double r01 = rng.uniform(0.05, 0.95);
        double l01 = rng.uniform(0.05, 0.95);
        double lge1 = rng.uniform(1.0, 4.0);
        uint64_t per = samples / configs;
        uint64_t sd = seed + 1000003ull * static_cast<uint64_t>(cfg);

        auto merge = [&](RelationCheck& rc, const Region& A, const Region& B, uint64_t tag) {
            InclusionReport rep = inclusion_check(a, A, B, per, sd + tag);
            rc.report.tested += rep.tested;
            rc.report.violations += rep.violations;
            if (!rc.report.witness && rep.witness) rc.report.witness = rep.witness;
        };

        merge(out[0], ellipsoid_E(x, r, 1.0), theta_ball(x, r * rootn), 1);
        merge(out[1], theta_ball(x, r * rootn), ellipsoid_E(x, r * Cd, 1.0), 2);
        merge(out[2], ellipsoid_E(x, std::pow(2.0, -Cd) * r, 1.0), ellipsoid_E(x, r, 0.25), 3);
        merge(out[3], comparison_rect(a, x, r01, l01), ellipsoid_E(x, r01 * l01 * cmax, 1.0), 4);
        merge(out[4], ellipsoid_Emax(x, r / 2.0, 1.0), ellipsoid_Emax(x, r, 0.5), 5);
        merge(out[5], ellipsoid_Emax(x, r, lge1), ellipsoid_Emax(x, r * lge1, 1.0), 6);
    }
    return out;
}

std::vector<Shell> shell_decomposition(const Anisotropy& a, const Vec& x, double r0, int K) {
    if (!(r0 > 0) || K < 1) throw std::invalid_argument("shell_decomposition: bad parameters");
    std::vector<Shell> out;
    out.reserve(static_cast<size_t>(K));
    double vb = unit_ball_volume(a.n);
    for (int k = 0; k < K; ++k) {
        double rk = r0 * std::pow(2.0, -k);
        double rk1 = rk / 2.0;
        Shell s;
        s.outer = ellipsoid_E(x, rk, 1.0);
        s.inner = ellipsoid_E(x, rk1, 1.0);
        s.measure = (std::pow(rk, a.c) - std::pow(rk1, a.c)) * vb;
        out.push_back(s);
    }
    return out;
}

ThetaRadii theta_euclid_sandwich(const Anisotropy& a, double r) {
    if (!(r > 0)) throw std::invalid_argument("theta_euclid_sandwich: r must be positive");
    ThetaRadii tr;
    double mx = 0;
    for (int i = 0; i < a.n; ++i) mx = std::max(mx, std::pow(r, 2.0 / a.bi(i)));
    tr.outer = std::sqrt(static_cast<double>(a.n)) * mx;
    // Largest rho with sum_i rho^{b_i} <= r^2; then |y| < rho forces |y|_b < r.
    double lo = 0, hi = mx + 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double t = 0;
        for (int i = 0; i < a.n; ++i) t += std::pow(mid, a.bi(i));
        (t <= r * r ? lo : hi) = mid;
    }
    tr.inner = lo;
    return tr;
}

}  // namespace anlg
