#include "anlg/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "anlg/nonlocal.hpp"
#include "anlg/regions.hpp"

namespace anlg {

namespace {

struct LogFit {
    double slope = 0;
    double intercept = 0;
    double rms = 0;
    int count = 0;
};

LogFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    LogFit f;
    f.count = static_cast<int>(xs.size());
    if (f.count < 2) return f;
    double mx = 0, my = 0;
    for (int i = 0; i < f.count; ++i) {
        mx += xs[static_cast<size_t>(i)];
        my += ys[static_cast<size_t>(i)];
    }
    mx /= f.count;
    my /= f.count;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < f.count; ++i) {
        const double dx = xs[static_cast<size_t>(i)] - mx;
        sxx += dx * dx;
        sxy += dx * (ys[static_cast<size_t>(i)] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double r2 = 0;
    for (int i = 0; i < f.count; ++i) {
        const double e =
            ys[static_cast<size_t>(i)] - (f.intercept + f.slope * xs[static_cast<size_t>(i)]);
        r2 += e * e;
    }
    f.rms = std::sqrt(r2 / f.count);
    return f;
}

double max_abs_value(const GridFunction& u) {
    return std::max(std::fabs(u.min_value()), std::fabs(u.max_value()));
}

// Grid interpolant wrapped for the operator evaluator, with the quadrature
// core floored at twice the grid spacing: below that scale the interpolant's
// slope kinks masquerade as curvature.
EvaluableFunction wrap_interpolant(const GridFunction& u) {
    EvaluableFunction uf;
    uf.f = [&u](const Vec& y) { return u.eval(y); };
    uf.sup_abs = max_abs_value(u);
    uf.M = std::max(1.2 * grid_hessian_bound(u), 1e-6);
    uf.eta0 = 1.0;
    return uf;
}

OperatorOptions floored_options(const GridFunction& u, OperatorOptions op) {
    double hmax = 0;
    for (int i = 0; i < u.n; ++i) hmax = std::max(hmax, u.h[i]);
    op.quad.r_in = std::max(op.quad.r_in, 2.0 * hmax);
    return op;
}

void require_covers_unit_ball(const GridFunction& u, const char* who) {
    for (int i = 0; i < u.n; ++i) {
        if (u.lo[i] > -1.0 + 1e-9 || u.hi()[i] < 1.0 - 1e-9)
            throw std::invalid_argument(std::string(who) + ": grid box must cover [-1,1]^n");
    }
}

}  // namespace

DecayReport fit_decay(std::vector<double> scales, std::vector<double> values) {
    if (scales.size() != values.size() || scales.empty())
        throw std::invalid_argument("fit_decay: ladder size mismatch");
    std::vector<size_t> order(scales.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return scales[i] > scales[j]; });

    DecayReport rep;
    for (size_t i : order) {
        if (!(scales[i] > 0)) throw std::invalid_argument("fit_decay: scales must be positive");
        if (!rep.scales.empty() && scales[i] == rep.scales.back())
            throw std::invalid_argument("fit_decay: duplicate scale");
        rep.scales.push_back(scales[i]);
        rep.values.push_back(values[i]);
    }

    std::vector<double> lx, ly;
    for (size_t i = 0; i < rep.scales.size(); ++i) {
        if (rep.values[i] > 0 && std::isfinite(rep.values[i])) {
            lx.push_back(std::log(rep.scales[i]));
            ly.push_back(std::log(rep.values[i]));
        }
    }
    rep.usable = static_cast<int>(lx.size());
    if (rep.usable == 0) {
        rep.degenerate = true;
        return rep;
    }
    const LogFit fit = least_squares(lx, ly);
    rep.exponent = fit.slope;
    rep.residual = fit.rms;
    return rep;
}

DecayReport de_giorgi_iteration(const GridFunction& u, const Anisotropy& a, const Vec& x0,
                                double r0, const DeGiorgiOptions& opt) {
    if (u.n != a.n || x0.n != a.n) throw std::invalid_argument("de_giorgi_iteration: dimension mismatch");
    if (!(r0 > 0)) throw std::invalid_argument("de_giorgi_iteration: r0 must be positive");
    if (opt.num_scales < 4) throw std::invalid_argument("de_giorgi_iteration: need at least 4 scales");

    std::vector<double> scales, oscs;
    for (int k = 0; k < opt.num_scales; ++k) {
        const double rk = r0 * std::pow(2.0, -k);
        const Ellipsoid reg = ellipsoid_Emax(x0, rk, 1.0);
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        size_t hits = 0;
        for (size_t f = 0; f < u.size(); ++f) {
            if (!contains(a, reg, u.node(f))) continue;
            ++hits;
            mn = std::min(mn, u.values[f]);
            mx = std::max(mx, u.values[f]);
        }
        if (hits < 2) continue;  // scale not resolved by the grid
        scales.push_back(rk);
        oscs.push_back(mx - mn);
    }
    if (scales.size() < 4)
        throw std::runtime_error("de_giorgi_iteration: fewer than 4 usable scales");

    const double zero = opt.zero_tol * (1.0 + max_abs_value(u));
    double top = 0;
    for (double o : oscs) top = std::max(top, o);
    DecayReport rep = fit_decay(std::move(scales), std::move(oscs));
    if (top <= zero) {
        rep.degenerate = true;
        rep.pass = true;  // constant data oscillates at roundoff only
        return rep;
    }
    rep.pass = rep.exponent > 0 && rep.residual < opt.residual_tol;
    return rep;
}

GrowthReport growth_lemma_check(const GridFunction& u, const KernelSpec& k, double delta,
                                double mu_candidate, double tau, const GrowthOptions& opt) {
    if (u.n != k.a.n) throw std::invalid_argument("growth_lemma_check: dimension mismatch");
    if (!(tau > 0)) throw std::invalid_argument("growth_lemma_check: tau must be positive");
    if (!(delta >= 0)) throw std::invalid_argument("growth_lemma_check: delta must be nonnegative");
    require_covers_unit_ball(u, "growth_lemma_check");

    GrowthReport rep;

    // (2) u <= 1 on grid nodes of B_1 and (4) node measure of the zero set.
    std::vector<size_t> in_b1;
    double max_b1 = -std::numeric_limits<double>::infinity();
    size_t zero_nodes = 0;
    double max_half = -std::numeric_limits<double>::infinity();
    for (size_t f = 0; f < u.size(); ++f) {
        const Vec x = u.node(f);
        const double rr = euclid_norm(x);
        if (rr < 1.0) {
            in_b1.push_back(f);
            max_b1 = std::max(max_b1, u.values[f]);
            if (u.values[f] <= 0) ++zero_nodes;
        }
        if (rr <= 0.5 + 1e-12) max_half = std::max(max_half, u.values[f]);
    }
    rep.hypothesis_margin[1] = 1.0 - max_b1;
    rep.zero_measure = static_cast<double>(zero_nodes) * u.node_volume();
    rep.hypothesis_margin[3] = rep.zero_measure - delta;

    // (3) tail bound on grid nodes outside B_1 plus a sampled annulus.
    double margin3 = std::numeric_limits<double>::infinity();
    auto tail_gap = [&](const Vec& x, double val) {
        const double bound = 2.0 * std::pow(2.0 * euclid_norm(x), tau) - 1.0;
        margin3 = std::min(margin3, bound - val);
    };
    for (size_t f = 0; f < u.size(); ++f) {
        const Vec x = u.node(f);
        if (euclid_norm(x) >= 1.0) tail_gap(x, u.values[f]);
    }
    LatticeSampler ls(u.n, opt.seed);
    int accepted = 0;
    for (int tries = 0; tries < 40 * opt.tail_samples && accepted < opt.tail_samples; ++tries) {
        Vec p = ls.next();
        Vec x = zero_vec(u.n);
        for (int i = 0; i < u.n; ++i) x[i] = (2.0 * p[i] - 1.0) * opt.tail_radius;
        const double rr = euclid_norm(x);
        if (rr <= 1.0 || rr > opt.tail_radius) continue;
        ++accepted;
        tail_gap(x, u.eval(x));
    }
    rep.hypothesis_margin[2] = margin3;

    // (1) M+ u >= 0 within error bars at a deterministic subsample of B_1.
    double margin1 = std::numeric_limits<double>::infinity();
    if (!in_b1.empty()) {
        const EvaluableFunction uf = wrap_interpolant(u);
        const OperatorOptions op = floored_options(u, opt.op);
        const size_t stride =
            std::max<size_t>(1, in_b1.size() / static_cast<size_t>(opt.subsolution_cap));
        for (size_t j = 0; j < in_b1.size(); j += stride) {
            const Vec x = u.node(in_b1[j]);
            const PucciPair pp = evaluate_pucci(k.a, k.lambda, k.Lambda, uf, x, op);
            margin1 = std::min(margin1, pp.plus.value + pp.plus.total_err() + opt.subsolution_tol);
        }
    }
    rep.hypothesis_margin[0] = margin1;

    const bool ok1 = margin1 >= 0;
    const bool ok2 = rep.hypothesis_margin[1] >= -1e-12;
    const bool ok3 = margin3 >= -1e-9;
    const bool ok4 = rep.hypothesis_margin[3] > 0;
    rep.hypotheses_ok = ok1 && ok2 && ok3 && ok4;
    if (!ok1)
        rep.failed_hypothesis = 1;
    else if (!ok2)
        rep.failed_hypothesis = 2;
    else if (!ok3)
        rep.failed_hypothesis = 3;
    else if (!ok4)
        rep.failed_hypothesis = 4;

    rep.max_half = max_half;
    rep.margin = 1.0 - max_half;
    rep.holds = rep.hypotheses_ok && max_half <= 1.0 - mu_candidate + 1e-12;
    return rep;
}

HarnackReport harnack_ratio(const std::function<double(const Vec&)>& g, const KernelSpec& k,
                            const HarnackOptions& opt) {
    const int n = k.a.n;
    const GridFunction dom = make_cube_grid(n, opt.half, opt.nodes);
    const DiscreteOperator op = assemble(dom, g, k, opt.quad);
    SolveReport sol = solve(op, opt.solve);

    HarnackReport rep;
    rep.converged = sol.converged;
    rep.residual = sol.residual;
    rep.center = sol.solution.eval(zero_vec(n));

    rep.sup_half = -std::numeric_limits<double>::infinity();
    rep.inf_half = std::numeric_limits<double>::infinity();
    for (size_t f = 0; f < sol.solution.size(); ++f) {
        if (euclid_norm(sol.solution.node(f)) > 0.5 + 1e-12) continue;
        rep.sup_half = std::max(rep.sup_half, sol.solution.values[f]);
        rep.inf_half = std::min(rep.inf_half, sol.solution.values[f]);
    }
    rep.inf_clamped = rep.inf_half < opt.clamp;
    rep.ratio = rep.sup_half / std::max(rep.inf_half, opt.clamp);
    const double denom = rep.center + rep.residual;
    rep.normalized = denom > 0 ? rep.sup_half / denom
                               : (rep.sup_half > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.u = std::move(sol.solution);
    return rep;
}

DecayReport point_estimate_decay(const GridFunction& u, const std::vector<double>& thresholds) {
    if (thresholds.empty()) throw std::invalid_argument("point_estimate_decay: empty ladder");
    require_covers_unit_ball(u, "point_estimate_decay");

    std::vector<double> measures(thresholds.size(), 0.0);
    const double nv = u.node_volume();
    for (size_t f = 0; f < u.size(); ++f) {
        if (euclid_norm(u.node(f)) >= 1.0) continue;
        for (size_t t = 0; t < thresholds.size(); ++t)
            if (u.values[f] >= thresholds[t]) measures[t] += nv;
    }
    DecayReport rep = fit_decay(thresholds, measures);
    rep.pass = rep.usable >= 3 && rep.exponent < 0;
    return rep;
}

DecayReport liouville_probe(const KernelSpec& k, const std::vector<double>& radii,
                            const LiouvilleOptions& opt) {
    const int n = k.a.n;
    const double reach = 2.0 * opt.half * std::sqrt(static_cast<double>(n));
    const GridFunction dom = make_cube_grid(n, opt.half, opt.nodes);

    std::vector<double> oscs;
    for (double R : radii) {
        if (!(R > reach))
            throw std::invalid_argument("liouville_probe: dipole radius inside the solve box");
        // Bounded dipole supported on the annulus R <= |y| <= 3R, odd in y_0.
        auto g = [R](const Vec& y) {
            const double rr = euclid_norm(y);
            if (rr < R || rr > 3.0 * R) return 0.0;
            return y[0] > 0 ? 1.0 : (y[0] < 0 ? -1.0 : 0.0);
        };
        SolveReport sol = solve(assemble(dom, g, k, opt.quad), opt.solve);
        double mn = std::numeric_limits<double>::infinity(), mx = -mn;
        for (size_t f = 0; f < sol.solution.size(); ++f) {
            if (euclid_norm(sol.solution.node(f)) >= 1.0) continue;
            mn = std::min(mn, sol.solution.values[f]);
            mx = std::max(mx, sol.solution.values[f]);
        }
        oscs.push_back(mx - mn);
    }
    DecayReport rep = fit_decay(radii, oscs);
    rep.pass = rep.usable >= 3 && rep.exponent < 0;
    return rep;
}

namespace {

// Shared envelope machinery for the Hoelder fits.  Pairs are sampled with a
// log-uniform target separation so every distance decade is populated, and
// half of them are anchored at the region center: pairs with both endpoints
// random almost never straddle a point singularity at small separations, so
// a purely random envelope reads a singular function as Lipschitz.  The
// per-bin envelope is the bin maximum (a quantile would miss the thin
// near-singular set), while the reported seminorm uses the quantile of
// |du| / d^gamma over all pairs as the robust sup.
struct PairSample {
    std::vector<double> logd;
    std::vector<double> delta;
};

HolderReport envelope_fit(const GridFunction& u, const Anisotropy& a,
                          const std::vector<size_t>& nodes, const Vec& anchor,
                          const std::function<double(size_t, size_t)>& value_gap,
                          double value_scale, HolderMetric metric, const HolderOptions& opt) {
    HolderReport rep;
    Rng rng(opt.seed);

    size_t anchor_pos = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < nodes.size(); ++j) {
        const double d = euclid_norm(u.node(nodes[j]) - anchor);
        if (d < best) {
            best = d;
            anchor_pos = j;
        }
    }

    double hmin = u.h[0];
    for (int i = 1; i < u.n; ++i) hmin = std::min(hmin, u.h[i]);
    Vec lo = u.node(nodes.front()), hi = lo;
    for (size_t f : nodes) {
        const Vec x = u.node(f);
        for (int i = 0; i < u.n; ++i) {
            lo[i] = std::min(lo[i], x[i]);
            hi[i] = std::max(hi[i], x[i]);
        }
    }
    double ext = 0;
    for (int i = 0; i < u.n; ++i) ext = std::max(ext, hi[i] - lo[i]);
    if (!(ext > 0)) throw std::invalid_argument("holder_fit: region has no spread");

    auto metric_dist = [&](const Vec& x, const Vec& y) {
        return metric == HolderMetric::Aniso ? aniso_norm(a, x - y) : euclid_norm(x - y);
    };

    // Nodes are addressed through a membership grid for snapping.
    std::vector<int32_t> member(u.size(), -1);
    for (size_t j = 0; j < nodes.size(); ++j) member[nodes[j]] = static_cast<int32_t>(j);

    PairSample ps;
    ps.logd.reserve(opt.pairs);
    ps.delta.reserve(opt.pairs);
    const double lr0 = std::log(hmin), lr1 = std::log(ext);
    double dmax = 0;
    for (size_t p = 0; p < 4 * opt.pairs && ps.logd.size() < opt.pairs; ++p) {
        const size_t ia =
            (p & 1) ? anchor_pos : static_cast<size_t>(rng.next_u64() % nodes.size());
        const Vec x = u.node(nodes[ia]);
        const double target = std::exp(rng.uniform(lr0, lr1));
        Vec dir = zero_vec(u.n);
        double nrm = 0;
        for (int i = 0; i < u.n; ++i) {
            dir[i] = rng.uniform(-1.0, 1.0);
            nrm += sq(dir[i]);
        }
        if (nrm == 0) continue;
        nrm = std::sqrt(nrm);
        std::array<int, kMaxDim> idx{};
        bool off = false;
        for (int i = 0; i < u.n; ++i) {
            const double yt = x[i] + target * dir[i] / nrm;
            const long q = std::lround((yt - u.lo[i]) / u.h[i]);
            if (q < 0 || q >= u.dims[static_cast<size_t>(i)]) {
                off = true;
                break;
            }
            idx[static_cast<size_t>(i)] = static_cast<int>(q);
        }
        if (off) continue;
        const size_t fb = u.flat(idx);
        if (member[fb] < 0 || fb == nodes[ia]) continue;
        const double d = metric_dist(x, u.node(fb));
        if (!(d > 0)) continue;
        ps.logd.push_back(std::log(d));
        ps.delta.push_back(value_gap(ia, static_cast<size_t>(member[fb])));
        dmax = std::max(dmax, ps.delta.back());
    }
    if (ps.logd.size() < 100) throw std::invalid_argument("holder_fit: too few usable pairs");

    if (dmax <= 1e-13 * (1.0 + value_scale)) {
        rep.degenerate = true;
        return rep;
    }

    double l0 = ps.logd[0], l1 = ps.logd[0];
    for (double l : ps.logd) {
        l0 = std::min(l0, l);
        l1 = std::max(l1, l);
    }
    const int nb = std::max(2, opt.bins);
    std::vector<double> env(static_cast<size_t>(nb), 0.0);
    std::vector<size_t> cnt(static_cast<size_t>(nb), 0);
    const double width = (l1 - l0) / nb;
    if (!(width > 0)) {
        rep.degenerate = true;  // all pairs at one distance; no slope defined
        return rep;
    }
    for (size_t p = 0; p < ps.logd.size(); ++p) {
        int b = static_cast<int>((ps.logd[p] - l0) / width);
        b = std::clamp(b, 0, nb - 1);
        env[static_cast<size_t>(b)] = std::max(env[static_cast<size_t>(b)], ps.delta[p]);
        ++cnt[static_cast<size_t>(b)];
    }
    // Pairs near the region diameter are geometry-capped (the gap saturates
    // at the range of the field), so the top distance octave is excluded from
    // the fit; it still feeds the seminorm below.
    const double fit_hi = l1 - std::log(2.0);
    std::vector<double> bx, by;
    for (int b = 0; b < nb; ++b) {
        const double center_b = l0 + (b + 0.5) * width;
        if (center_b > fit_hi) continue;
        if (cnt[static_cast<size_t>(b)] < opt.min_bin || !(env[static_cast<size_t>(b)] > 0))
            continue;
        bx.push_back(center_b);
        by.push_back(std::log(env[static_cast<size_t>(b)]));
    }
    rep.bins_used = static_cast<int>(bx.size());
    const LogFit fit = least_squares(bx, by);
    rep.exponent_raw = fit.slope;
    rep.residual = fit.rms;
    rep.exponent = std::clamp(fit.slope, 0.0, opt.cap);

    std::vector<double> ratio(ps.logd.size());
    for (size_t p = 0; p < ps.logd.size(); ++p)
        ratio[p] = ps.delta[p] * std::exp(-rep.exponent * ps.logd[p]);
    const size_t qi = static_cast<size_t>(opt.quantile * static_cast<double>(ratio.size() - 1));
    std::nth_element(ratio.begin(), ratio.begin() + static_cast<long>(qi), ratio.end());
    rep.seminorm = ratio[qi];
    return rep;
}

}  // namespace

HolderReport holder_fit(const GridFunction& u, const Anisotropy& a, const Vec& center,
                        double radius, HolderMetric metric, const HolderOptions& opt) {
    if (u.n != a.n || center.n != u.n) throw std::invalid_argument("holder_fit: dimension mismatch");
    std::vector<size_t> nodes;
    for (size_t f = 0; f < u.size(); ++f)
        if (euclid_norm(u.node(f) - center) < radius + 1e-12) nodes.push_back(f);
    if (nodes.size() < 8) throw std::invalid_argument("holder_fit: region captures too few nodes");

    auto gap = [&](size_t ia, size_t ib) {
        return std::fabs(u.values[nodes[ia]] - u.values[nodes[ib]]);
    };
    return envelope_fit(u, a, nodes, center, gap, max_abs_value(u), metric, opt);
}

HolderReport gradient_holder_fit(const GridFunction& u, const Anisotropy& a, const Vec& center,
                                 double radius, HolderMetric metric, const HolderOptions& opt) {
    if (u.n != a.n || center.n != u.n)
        throw std::invalid_argument("gradient_holder_fit: dimension mismatch");

    // Central differences exist on interior nodes only.
    std::vector<size_t> nodes;
    std::vector<std::array<double, kMaxDim>> grad;
    for (size_t f = 0; f < u.size(); ++f) {
        const auto idx = u.unflat(f);
        bool interior = true;
        for (int i = 0; i < u.n; ++i) {
            const size_t si = static_cast<size_t>(i);
            if (idx[si] == 0 || idx[si] + 1 >= u.dims[si]) {
                interior = false;
                break;
            }
        }
        if (!interior || euclid_norm(u.node(f) - center) >= radius + 1e-12) continue;
        std::array<double, kMaxDim> gv{};
        for (int i = 0; i < u.n; ++i) {
            const size_t si = static_cast<size_t>(i);
            auto jp = idx, jm = idx;
            ++jp[si];
            --jm[si];
            gv[si] = (u.values[u.flat(jp)] - u.values[u.flat(jm)]) / (2.0 * u.h[i]);
        }
        nodes.push_back(f);
        grad.push_back(gv);
    }
    if (nodes.size() < 8)
        throw std::invalid_argument("gradient_holder_fit: region captures too few nodes");

    double scale = 0;
    for (const auto& gv : grad)
        for (int i = 0; i < u.n; ++i) scale = std::max(scale, std::fabs(gv[static_cast<size_t>(i)]));

    auto gap = [&](size_t ia, size_t ib) {
        double s = 0;
        for (int i = 0; i < u.n; ++i)
            s += sq(grad[ia][static_cast<size_t>(i)] - grad[ib][static_cast<size_t>(i)]);
        return std::sqrt(s);
    };
    return envelope_fit(u, a, nodes, center, gap, scale, metric, opt);
}

}  // namespace anlg
