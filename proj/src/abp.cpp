#include "anlg/abp.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <numeric>

#include "anlg/grid_function.hpp"

namespace anlg {

namespace {

double plus(double v) { return v > 0 ? v : 0; }

// Per-axis node index window of a closed box, with a relative slack so nodes
// sitting on a face count for every adjacent box.
struct IndexBox {
    std::array<int, kMaxDim> lo{};
    std::array<int, kMaxDim> hi{};
    bool empty = false;
};

IndexBox index_box(const GridFunction& g, const Vec& blo, const Vec& bhi) {
    IndexBox ib;
    for (int i = 0; i < g.n; ++i) {
        size_t a = static_cast<size_t>(i);
        double slack = 1e-9 * (std::fabs(blo[i]) + std::fabs(bhi[i]) + g.h[i]);
        int lo = static_cast<int>(std::ceil((blo[i] - g.lo[i] - slack) / g.h[i]));
        int hi = static_cast<int>(std::floor((bhi[i] - g.lo[i] + slack) / g.h[i]));
        ib.lo[a] = std::max(lo, 0);
        ib.hi[a] = std::min(hi, g.dims[a] - 1);
        if (ib.lo[a] > ib.hi[a]) ib.empty = true;
    }
    return ib;
}

template <typename Fn>
void for_nodes(const GridFunction& g, const IndexBox& ib, Fn&& fn) {
    if (ib.empty) return;
    std::array<int, kMaxDim> idx = ib.lo;
    for (;;) {
        fn(idx);
        int i = g.n - 1;
        for (; i >= 0; --i) {
            size_t a = static_cast<size_t>(i);
            if (++idx[a] <= ib.hi[a]) break;
            idx[a] = ib.lo[a];
        }
        if (i < 0) break;
    }
}

bool in_closed_rect(const AnisoRect& r, const Vec& y, double slack_rel = 1e-12) {
    for (int i = 0; i < y.n; ++i) {
        double slack = slack_rel * (std::fabs(r.center[i]) + r.half[i] + 1.0);
        if (std::fabs(y[i] - r.center[i]) > r.half[i] + slack) return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Detachment sets.

DetachmentReport detachment_sets(const GridFunction& u, const ConcaveEnvelope& env,
                                 const Vec& x, double big_m, double f_at_x,
                                 const Anisotropy& a, const DetachmentOptions& opt) {
    if (big_m <= 0) throw std::invalid_argument("detachment_sets: M must be positive");
    if (u.n != a.n || x.n != u.n)
        throw std::invalid_argument("detachment_sets: dimension mismatch");
    if (env.contact.size() != u.size())
        throw std::invalid_argument("detachment_sets: envelope does not match the grid");

    std::array<int, kMaxDim> idx{};
    for (int i = 0; i < u.n; ++i) {
        double t = (x[i] - u.lo[i]) / u.h[i];
        long k = std::lround(t);
        if (std::fabs(t - static_cast<double>(k)) > 1e-6 || k < 0 ||
            k >= u.dims[static_cast<size_t>(i)])
            throw std::invalid_argument("detachment_sets: x is not a grid node");
        idx[static_cast<size_t>(i)] = static_cast<int>(k);
    }
    size_t node = u.flat(idx);
    if (!env.contact[node])
        throw std::invalid_argument("detachment_sets: x is not a contact point");

    DetachmentReport rep;
    rep.frak_c = opt.frak_c > 0 ? opt.frak_c : frak_C(a);
    rep.l = std::pow(2.0, -static_cast<double>(rep.frak_c) * a.b_min / 2.0);
    double r0 = opt.rho0 * std::pow(2.0, -1.0 / a.q_min_s);
    Vec grad = env.gradient(node);
    double ux = u.values[node];
    double nv = u.node_volume();
    double scale_ratio = a.q_min_s / a.q_max_s;

    for (int k = 0; k < opt.num_scales; ++k) {
        double rk = r0 * std::pow(rep.l, k);
        double thr = big_m * scale_ratio * std::pow(rk, 4.0 / a.b_min);
        Ellipsoid outer = ellipsoid_E(x, rk, 1.0);
        Ellipsoid inner = ellipsoid_E(x, rk * rep.l, 1.0);
        Vec hw = bounding_half_widths(a, Region(outer));
        IndexBox ib = index_box(u, x - hw, x + hw);
        long ring_count = 0, w_count = 0;
        for_nodes(u, ib, [&](const std::array<int, kMaxDim>& id) {
            size_t f = u.flat(id);
            Vec y = u.node(f);
            if (!contains(a, outer, y) || contains(a, inner, y)) return;
            ++ring_count;
            if (u.values[f] < ux + dot(y - x, grad) - thr) ++w_count;
        });
        rep.radii.push_back(rk);
        rep.thresholds.push_back(thr);
        rep.w_measure.push_back(static_cast<double>(w_count) * nv);
        rep.ring_measure.push_back(static_cast<double>(ring_count) * nv);
        if (rep.first_k < 0 &&
            static_cast<double>(w_count) <= opt.c0 * (f_at_x / big_m) * static_cast<double>(ring_count))
            rep.first_k = k;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Rectangle family.

namespace {

struct WorkTile {
    FamilyRect fr;
    std::vector<size_t> contact_ids;
    std::vector<double> gaps;   // sorted Gamma - u over dilated companion nodes
    long m_need = 0;            // node count required by property (6)
    double comp_volume = 0;
};

using CellKey = std::array<int64_t, kMaxDim>;

// Tile geometry for lattice cell `cell` at generation g; gen-1 full edges e1.
FamilyRect make_tile(int n, const Vec& e1, int frak_c, int g, const CellKey& cell,
                     const Anisotropy& a, double r0, double l) {
    FamilyRect fr;
    fr.generation = g;
    fr.cell = cell;
    double shrink = std::pow(2.0, -static_cast<double>(frak_c) * (g - 1));
    Vec edges = zero_vec(n);
    fr.rect.center = zero_vec(n);
    fr.rect.half = zero_vec(n);
    double d2 = 0;
    for (int i = 0; i < n; ++i) {
        edges[i] = e1[i] * shrink;
        fr.rect.half[i] = edges[i] / 2.0;
        fr.rect.center[i] = (static_cast<double>(cell[static_cast<size_t>(i)]) + 0.5) * edges[i];
        d2 += sq(edges[i]);
    }
    fr.diameter = std::sqrt(d2);
    double rk = r0 * std::pow(l, g - 1);
    fr.companion.center = fr.rect.center;
    fr.companion.half = zero_vec(n);
    double dt2 = 0;
    for (int i = 0; i < n; ++i) {
        fr.companion.half[i] = std::pow(rk, 2.0 / a.bi(i));
        dt2 += sq(2.0 * fr.companion.half[i]);
    }
    fr.companion_diameter = std::sqrt(dt2);
    return fr;
}

bool cell_meets_unit_ball(int n, const Vec& e1, int frak_c, int g, const CellKey& cell) {
    double shrink = std::pow(2.0, -static_cast<double>(frak_c) * (g - 1));
    double d2 = 0;
    for (int i = 0; i < n; ++i) {
        double edge = e1[i] * shrink;
        double c = (static_cast<double>(cell[static_cast<size_t>(i)]) + 0.5) * edge;
        double gap = std::fabs(c) - edge / 2.0;
        if (gap > 0) d2 += sq(gap);
    }
    return d2 <= 1.0 + 1e-12;
}

// Gathers everything property testing needs for one tile.
void tile_measurements(WorkTile& wt, const GridFunction& u, const GridFunction& f,
                       const ConcaveEnvelope& env, double c_dilate, double varsigma) {
    FamilyRect& fr = wt.fr;
    const GridFunction& gam = env.gamma;
    fr.grad_image = gradient_image_measure(env, fr.rect);

    double comp_vol = 1;
    for (int i = 0; i < u.n; ++i) comp_vol *= 2.0 * fr.companion.half[i];
    wt.comp_volume = comp_vol;

    // max f+ over companion nodes, falling back to the center value when the
    // companion is below f's resolution.
    double mf = -std::numeric_limits<double>::infinity();
    IndexBox fib = index_box(f, fr.companion.center - fr.companion.half,
                             fr.companion.center + fr.companion.half);
    bool any = false;
    for_nodes(f, fib, [&](const std::array<int, kMaxDim>& id) {
        any = true;
        mf = std::max(mf, f.values[f.flat(id)]);
    });
    if (!any) mf = f.eval(fr.companion.center);
    fr.max_f_plus = plus(mf);

    // Gaps Gamma - u over the dilated companion, sorted for quantile lookups.
    AnisoRect dil{fr.companion.center, c_dilate * fr.companion.half};
    IndexBox ib = index_box(u, dil.center - dil.half, dil.center + dil.half);
    wt.gaps.clear();
    for_nodes(u, ib, [&](const std::array<int, kMaxDim>& id) {
        size_t fl = u.flat(id);
        Vec y = u.node(fl);
        if (!in_closed_rect(dil, y)) return;
        wt.gaps.push_back(gam.values[fl] - u.values[fl]);
    });
    std::sort(wt.gaps.begin(), wt.gaps.end());
    double nv = u.node_volume();
    wt.m_need = static_cast<long>(std::ceil(varsigma * comp_vol / nv * (1.0 - 1e-12)));
    if (wt.m_need < 1) wt.m_need = 1;
}

long gap_count(const std::vector<double>& gaps, double thr) {
    return static_cast<long>(std::upper_bound(gaps.begin(), gaps.end(), thr) - gaps.begin());
}

void apply_property_tests(WorkTile& wt, int n, double c5, double c6, double contact_tol,
                          double nv) {
    FamilyRect& fr = wt.fr;
    if (fr.max_f_plus > 0) {
        double rhs = c5 * std::pow(fr.max_f_plus, n) * wt.comp_volume;
        fr.pass5 = fr.grad_image <= rhs * (1.0 + 1e-12);
    } else {
        fr.pass5 = fr.grad_image <= 1e-15;
    }
    double thr = std::max(c6 * fr.max_f_plus * sq(fr.companion_diameter), contact_tol);
    long cnt = gap_count(wt.gaps, thr);
    fr.contact_fraction = static_cast<double>(cnt) * nv / wt.comp_volume;
    fr.pass6 = cnt >= wt.m_need;
}

int64_t floor_div(int64_t x, int64_t d) {
    int64_t q = x / d, r = x % d;
    return (r != 0 && ((r < 0) != (d < 0))) ? q - 1 : q;
}

}  // namespace

RectangleFamily abp_rectangle_family(const GridFunction& u, const GridFunction& f,
                                     const KernelSpec& kernel, const FamilyOptions& opt) {
    const Anisotropy& a = kernel.a;
    if (u.n != a.n || f.n != a.n)
        throw std::invalid_argument("abp_rectangle_family: dimension mismatch");

    RectangleFamily fam;
    fam.envelope = concave_envelope(u, opt.envelope);
    fam.frak_c = opt.frak_c > 0 ? opt.frak_c : frak_C(a);
    fam.l = std::pow(2.0, -static_cast<double>(fam.frak_c) * a.b_min / 2.0);
    fam.r0 = opt.rho0 * std::pow(2.0, -1.0 / a.q_min_s);
    fam.c_dilate = 1.0 + std::pow(2.0, -static_cast<double>(fam.frak_c + 1));
    double lc = std::pow(fam.l, a.c);
    fam.varsigma = opt.varsigma > 0
                       ? opt.varsigma
                       : (1.0 - opt.eps1) * (1.0 - lc) * unit_ball_volume(a.n) /
                             std::pow(2.0, a.n);
    fam.sup_u = plus(u.max_value());
    double nv = u.node_volume();

    Vec e1 = zero_vec(a.n);
    for (int i = 0; i < a.n; ++i)
        e1[i] = std::pow(fam.r0, 2.0 / a.bi(i)) / std::pow(2.0, fam.frak_c);

    // Contact nodes, bucketed into the generation-1 lattice cells whose
    // closures contain them; only cells meeting the closed unit ball tile.
    std::vector<size_t> contact_nodes;
    for (size_t fl = 0; fl < u.size(); ++fl)
        if (fam.envelope.contact[fl]) contact_nodes.push_back(fl);

    std::map<CellKey, std::vector<size_t>> cells;
    for (size_t fl : contact_nodes) {
        Vec x = u.node(fl);
        std::array<std::vector<int64_t>, kMaxDim> cand;
        for (int i = 0; i < a.n; ++i) {
            double t = x[i] / e1[i];
            auto base = static_cast<int64_t>(std::floor(t));
            auto& c = cand[static_cast<size_t>(i)];
            c.push_back(base);
            if (t - std::floor(t) < 1e-9) c.push_back(base - 1);
            if (std::ceil(t) - t < 1e-9 && std::ceil(t) != std::floor(t))
                c.push_back(base + 1);
        }
        std::array<size_t, kMaxDim> pick{};
        for (;;) {
            CellKey key{};
            for (int i = 0; i < a.n; ++i)
                key[static_cast<size_t>(i)] = cand[static_cast<size_t>(i)][pick[static_cast<size_t>(i)]];
            if (cell_meets_unit_ball(a.n, e1, fam.frak_c, 1, key)) cells[key].push_back(fl);
            int i = a.n - 1;
            for (; i >= 0; --i) {
                size_t ai = static_cast<size_t>(i);
                if (++pick[ai] < cand[ai].size()) break;
                pick[ai] = 0;
            }
            if (i < 0) break;
        }
    }

    // Supersolution certificate M+ u >= -f at contact nodes inside B_1,
    // within the quadrature error bars.
    fam.supersolution_margin = std::numeric_limits<double>::infinity();
    if (opt.certify_supersolution) {
        std::vector<size_t> inside;
        for (size_t fl : contact_nodes)
            if (euclid_norm(u.node(fl)) < 1.0) inside.push_back(fl);
        size_t stride = std::max<size_t>(1, inside.size() / static_cast<size_t>(opt.supersolution_cap));
        EvaluableFunction uf;
        uf.f = [&u](const Vec& y) { return u.eval(y); };
        uf.sup_abs = std::max(std::fabs(u.min_value()), std::fabs(u.max_value()));
        uf.M = std::max(1.2 * grid_hessian_bound(u), 1e-6);
        uf.eta0 = 1.0;
        // The interpolant has slope kinks at the nodes, so resolving the
        // quadrature below the grid scale integrates artifacts; keep the core
        // inside r_in and account for it through the near-field bound.
        OperatorOptions op = opt.op;
        double hmax = 0;
        for (int i = 0; i < u.n; ++i) hmax = std::max(hmax, u.h[i]);
        op.quad.r_in = std::max(op.quad.r_in, 2.0 * hmax);
        for (size_t j = 0; j < inside.size(); j += stride) {
            Vec x = u.node(inside[j]);
            PucciPair pp = evaluate_pucci(a, kernel.lambda, kernel.Lambda, uf, x, op);
            double margin = pp.plus.value + pp.plus.total_err() + f.eval(x) + opt.supersolution_tol;
            fam.supersolution_margin = std::min(fam.supersolution_margin, margin);
        }
        if (fam.supersolution_margin < 0)
            throw std::invalid_argument(
                "abp_rectangle_family: M+ u >= -f fails at a contact node (margin " +
                std::to_string(fam.supersolution_margin) + ")");
    }

    std::vector<WorkTile> batch;
    for (auto& [key, ids] : cells) {
        WorkTile wt;
        wt.fr = make_tile(a.n, e1, fam.frak_c, 1, key, a, fam.r0, fam.l);
        wt.contact_ids = ids;
        batch.push_back(std::move(wt));
    }

    fam.c5 = opt.c5;
    fam.c6 = opt.c6;
    int split = 1 << fam.frak_c;
    std::vector<WorkTile> kept;

    for (int g = 1; !batch.empty(); ++g) {
        parallel_for_each(batch.size(), [&](size_t j) {
            tile_measurements(batch[j], u, f, fam.envelope, fam.c_dilate, fam.varsigma);
        });

        if (g == 1) {
            // Auto calibration fits the constants on the initial tiles so the
            // first pass terminates wherever a finite constant can make it.
            if (opt.c5 <= 0) {
                double c5 = 0;
                for (const WorkTile& wt : batch)
                    if (wt.fr.max_f_plus > 0)
                        c5 = std::max(c5, wt.fr.grad_image /
                                              (std::pow(wt.fr.max_f_plus, a.n) * wt.comp_volume));
                fam.c5 = c5 > 0 ? c5 * (1.0 + 1e-9) : 1.0;
            }
            if (opt.c6 <= 0) {
                double c6 = 0;
                for (const WorkTile& wt : batch) {
                    if (wt.fr.max_f_plus <= 0) continue;
                    if (static_cast<long>(wt.gaps.size()) < wt.m_need) continue;
                    double t_need = wt.gaps[static_cast<size_t>(wt.m_need - 1)];
                    if (t_need <= fam.envelope.contact_tol) continue;
                    c6 = std::max(c6, t_need / (wt.fr.max_f_plus * sq(wt.fr.companion_diameter)));
                }
                fam.c6 = c6 > 0 ? c6 * (1.0 + 1e-9) : 1.0;
            }
        }

        std::vector<WorkTile> next;
        for (WorkTile& wt : batch) {
            apply_property_tests(wt, a.n, fam.c5, fam.c6, fam.envelope.contact_tol, nv);
            if (wt.fr.pass5 && wt.fr.pass6) {
                kept.push_back(std::move(wt));
                continue;
            }
            if (g >= opt.max_depth) {
                fam.terminated = false;
                fam.offenders.push_back(wt.fr);
                kept.push_back(std::move(wt));  // offenders still tile their patch
                continue;
            }
            // Split per axis by 2^C; children keep only inherited contact.
            std::array<int64_t, kMaxDim> sub{};
            for (;;) {
                CellKey child{};
                for (int i = 0; i < a.n; ++i) {
                    size_t ai = static_cast<size_t>(i);
                    child[ai] = wt.fr.cell[ai] * split + sub[ai];
                }
                WorkTile cw;
                cw.fr = make_tile(a.n, e1, fam.frak_c, g + 1, child, a, fam.r0, fam.l);
                for (size_t fl : wt.contact_ids)
                    if (in_closed_rect(cw.fr.rect, u.node(fl))) cw.contact_ids.push_back(fl);
                if (!cw.contact_ids.empty()) next.push_back(std::move(cw));
                int i = a.n - 1;
                for (; i >= 0; --i) {
                    size_t ai = static_cast<size_t>(i);
                    if (++sub[ai] < split) break;
                    sub[ai] = 0;
                }
                if (i < 0) break;
            }
        }
        batch = std::move(next);
    }

    // The final flags re-verify the construction with exact arithmetic.
    fam.depth = 1;
    std::map<std::pair<int, CellKey>, size_t> index;
    bool dup = false;
    std::vector<int> gens;
    for (size_t j = 0; j < kept.size(); ++j) {
        const FamilyRect& fr = kept[j].fr;
        fam.depth = std::max(fam.depth, fr.generation);
        if (!index.emplace(std::make_pair(fr.generation, fr.cell), j).second) dup = true;
        gens.push_back(fr.generation);
    }
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    bool nested = false;
    for (const WorkTile& wt : kept) {
        for (int g : gens) {
            if (g >= wt.fr.generation) break;
            int64_t d = static_cast<int64_t>(1) << (fam.frak_c * (wt.fr.generation - g));
            CellKey anc{};
            for (int i = 0; i < a.n; ++i)
                anc[static_cast<size_t>(i)] = floor_div(wt.fr.cell[static_cast<size_t>(i)], d);
            if (index.count(std::make_pair(g, anc))) nested = true;
        }
    }
    fam.disjoint = !dup && !nested;

    std::vector<uint8_t> covered(u.size(), 0);
    for (const WorkTile& wt : kept)
        for (size_t fl : wt.contact_ids) covered[fl] = 1;
    fam.covers_contact = true;
    for (const auto& [key, ids] : cells)
        for (size_t fl : ids)
            if (!covered[fl]) fam.covers_contact = false;

    fam.closures_meet_contact = true;
    double e2 = 0;
    for (int i = 0; i < a.n; ++i) e2 += sq(std::pow(fam.r0, 2.0 / a.bi(i)));
    double dmax = std::sqrt(e2) * (1.0 + 1e-12);
    fam.diameter_bound = true;
    for (const WorkTile& wt : kept) {
        if (wt.contact_ids.empty() || !in_closed_rect(wt.fr.rect, u.node(wt.contact_ids.front())))
            fam.closures_meet_contact = false;
        if (wt.fr.diameter > dmax) fam.diameter_bound = false;
    }

    fam.rects.reserve(kept.size());
    for (WorkTile& wt : kept) fam.rects.push_back(wt.fr);
    return fam;
}

// ---------------------------------------------------------------------------
// Volume consistency.

VolumeConsistency abp_volume_consistency(const RectangleFamily& fam, const GridFunction& u,
                                         const Anisotropy& a, double tol) {
    VolumeConsistency vc;
    vc.sup_u = plus(u.max_value());
    int n = u.n;

    std::vector<Vec> grads;
    for (size_t fl = 0; fl < u.size(); ++fl) {
        if (!fam.envelope.contact[fl]) continue;
        if (fl >= fam.envelope.node_facets.size()) continue;
        for (int32_t fc : fam.envelope.node_facets[fl])
            grads.push_back(fam.envelope.facets[static_cast<size_t>(fc)].g);
    }
    vc.gradient_hull = grads.empty() ? 0.0 : convex_hull_measure(grads);
    vc.plane_ball = unit_ball_volume(n) * std::pow(vc.sup_u / 4.0, n);
    vc.gradient_bound_ok = vc.gradient_hull >= vc.plane_ball * (1.0 - tol);

    // One ellipsoid per rectangle, anchored at the contact node of its closure
    // nearest the center, with the companion scale r_k.
    std::vector<Ellipsoid> ells;
    for (const FamilyRect& fr : fam.rects) {
        double best = std::numeric_limits<double>::infinity();
        Vec anchor = fr.rect.center;
        for (size_t fl = 0; fl < u.size(); ++fl) {
            if (!fam.envelope.contact[fl]) continue;
            Vec y = u.node(fl);
            if (!in_closed_rect(fr.rect, y)) continue;
            double d = euclid_norm_sq(y - fr.rect.center);
            if (d < best) {
                best = d;
                anchor = y;
            }
        }
        double rj = fam.r0 * std::pow(fam.l, fr.generation - 1);
        ells.push_back(ellipsoid_E(anchor, rj, 1.0));
    }

    long count = 0;
    int max_over = 0;
    for (size_t fl = 0; fl < u.size(); ++fl) {
        Vec y = u.node(fl);
        int m = 0;
        for (const Ellipsoid& e : ells)
            if (contains(a, e, y)) ++m;
        if (m > 0) ++count;
        max_over = std::max(max_over, m);
    }
    vc.union_volume = static_cast<double>(count) * u.node_volume();
    vc.max_overlap = max_over;

    double maxf = 0;
    for (const FamilyRect& fr : fam.rects) maxf = std::max(maxf, fr.max_f_plus);
    double omega = unit_ball_volume(n);
    double denom = fam.c5 * std::pow(maxf, n) * (std::pow(2.0, n) / omega) *
                   static_cast<double>(std::max(max_over, 1));
    if (denom > 0) {
        vc.chain_constant = omega / std::pow(4.0, n) / denom;
        vc.chain_ok = vc.chain_constant * std::pow(vc.sup_u, n) <= vc.union_volume * (1.0 + tol);
    } else {
        vc.chain_constant = 0;
        vc.chain_ok = vc.sup_u <= 0;
    }
    return vc;
}

// ---------------------------------------------------------------------------
// Growth cover.

GrowthCover cc_cover(const std::vector<Vec>& pts, const std::vector<double>& t,
                     const std::function<double(int, double)>& h) {
    if (pts.size() != t.size()) throw std::invalid_argument("cc_cover: size mismatch");
    GrowthCover gc;
    if (pts.empty()) return gc;
    int n = pts[0].n;
    for (double tv : t)
        if (!(tv >= 0)) throw std::invalid_argument("cc_cover: negative parameter");

    std::vector<size_t> order(pts.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        if (t[x] != t[y]) return t[x] > t[y];
        return x < y;
    });

    std::vector<uint8_t> covered(pts.size(), 0);
    for (size_t oi : order) {
        if (covered[oi]) continue;
        GrowthCover::Entry e;
        e.point = oi;
        e.t = t[oi];
        e.rect.center = pts[oi];
        e.rect.half = zero_vec(n);
        for (int i = 0; i < n; ++i) e.rect.half[i] = h(i, t[oi]);
        for (size_t j = 0; j < pts.size(); ++j)
            if (!covered[j] && in_closed_rect(e.rect, pts[j])) covered[j] = 1;
        gc.rects.push_back(std::move(e));
    }
    for (size_t j = 0; j < pts.size(); ++j) {
        int m = 0;
        for (const auto& e : gc.rects)
            if (in_closed_rect(e.rect, pts[j])) ++m;
        gc.max_overlap = std::max(gc.max_overlap, m);
    }
    return gc;
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund splitting.

CzDecomposition cz_decompose(const GridFunction& mask, const Anisotropy& a, double threshold,
                             int frak_c, int max_generations) {
    if (mask.n != a.n) throw std::invalid_argument("cz_decompose: dimension mismatch");
    int C = frak_c > 0 ? frak_c : frak_C(a);
    CzDecomposition out;

    auto kim = [&](int m, int i) {
        return static_cast<int>(std::llround(2.0 * m / a.bi(i)));
    };

    struct Cell {
        Vec lo;
        std::array<int, kMaxDim> k{};
        int m = 0;
    };

    std::function<void(const Cell&)> rec = [&](const Cell& cell) {
        ++out.cells_visited;
        Vec w = zero_vec(a.n);
        for (int i = 0; i < a.n; ++i) w[i] = std::pow(2.0, -cell.k[static_cast<size_t>(i)]);
        // Half-open membership [lo, lo + w) makes sibling cells partition the
        // parent exactly; node coordinates route to exactly one cell.
        IndexBox ib = index_box(mask, cell.lo, cell.lo + w);
        long tot = 0, hit = 0;
        for_nodes(mask, ib, [&](const std::array<int, kMaxDim>& id) {
            size_t fl = mask.flat(id);
            Vec y = mask.node(fl);
            for (int i = 0; i < a.n; ++i)
                if (y[i] < cell.lo[i] || y[i] >= cell.lo[i] + w[i]) return;
            ++tot;
            if (mask.values[fl] > 0.5) ++hit;
        });
        if (tot == 0) return;
        out.max_generation = std::max(out.max_generation, cell.m);
        double frac = static_cast<double>(hit) / static_cast<double>(tot);
        if (frac > threshold) {
            CzNode nd;
            nd.generation = cell.m;
            nd.splits = cell.k;
            nd.fraction = frac;
            nd.rect.center = cell.lo + 0.5 * w;
            nd.rect.half = 0.5 * w;
            int kmin = INT_MAX;
            for (int i = 0; i < a.n; ++i) kmin = std::min(kmin, cell.k[static_cast<size_t>(i)] + 1);
            int kp = std::max(kmin / C - 1, 0);
            nd.predecessor.center = nd.rect.center;
            nd.predecessor.half = zero_vec(a.n);
            for (int i = 0; i < a.n; ++i)
                nd.predecessor.half[i] =
                    std::pow(2.0, -static_cast<double>(C) * kp * a.b_min / a.bi(i));
            out.selected.push_back(nd);
            return;
        }
        if (hit == 0 || cell.m >= max_generations) return;

        Cell child;
        child.m = cell.m + 1;
        std::array<int, kMaxDim> parts{};
        for (int i = 0; i < a.n; ++i) {
            size_t ai = static_cast<size_t>(i);
            child.k[ai] = kim(child.m, i);
            parts[ai] = 1 << (child.k[ai] - cell.k[ai]);
        }
        std::array<int, kMaxDim> sub{};
        for (;;) {
            child.lo = cell.lo;
            for (int i = 0; i < a.n; ++i)
                child.lo[i] += sub[static_cast<size_t>(i)] *
                               std::pow(2.0, -child.k[static_cast<size_t>(i)]);
            rec(child);
            int i = a.n - 1;
            for (; i >= 0; --i) {
                size_t ai = static_cast<size_t>(i);
                if (++sub[ai] < parts[ai]) break;
                sub[ai] = 0;
            }
            if (i < 0) break;
        }
    };

    Cell root;
    root.lo = zero_vec(a.n);
    for (int i = 0; i < a.n; ++i) root.lo[i] = -0.5;
    root.m = 0;
    rec(root);
    return out;
}

}  // namespace anlg
