#include "anlg/envelope.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace anlg {

namespace {

struct CloudPoint {
    Vec x;
    double z = 0;
    size_t node = 0;
};

double plus(double v) { return v > 0 ? v : 0; }

// Curvature scale used by the automatic contact tolerance.  The max second
// difference quotient diverges for kinked data (a single spike gives 2/h^2),
// so take a high quantile of the per-axis quotients: equal to the max up to an
// O(1) factor for smooth data, and blind to isolated kinks.
double robust_curvature_scale(const GridFunction& u) {
    std::vector<double> quot;
    size_t total = u.size();
    for (size_t f = 0; f < total; ++f) {
        std::array<int, kMaxDim> idx = u.unflat(f);
        for (int i = 0; i < u.n; ++i) {
            size_t a = static_cast<size_t>(i);
            if (idx[a] < 1 || idx[a] > u.dims[a] - 2) continue;
            std::array<int, kMaxDim> l = idx, r = idx;
            l[a] -= 1;
            r[a] += 1;
            quot.push_back(std::fabs(u.at(l) + u.at(r) - 2.0 * u.values[f]) / sq(u.h[i]));
        }
    }
    if (quot.empty()) return 0;
    size_t k = static_cast<size_t>(0.9 * static_cast<double>(quot.size() - 1));
    std::nth_element(quot.begin(), quot.begin() + static_cast<long>(k), quot.end());
    return quot[k];
}

void check_nonpositive_outside_b1(const GridFunction& u) {
    size_t total = u.size();
    double scale = std::max(std::fabs(u.min_value()), std::fabs(u.max_value()));
    double tol = 1e-12 * (1.0 + scale);
    for (size_t f = 0; f < total; ++f) {
        Vec x = u.node(f);
        if (euclid_norm(x) <= 1.0) continue;
        if (u.values[f] > tol)
            throw std::invalid_argument("concave_envelope: u positive outside the unit ball at a grid node");
    }
    if (u.exterior_fn) {
        // Spot check the callable on a deterministic shell of points.
        LatticeSampler lat(u.n, 0x9e3779b9u);
        Vec hi = u.hi();
        double rad = 0;
        for (int i = 0; i < u.n; ++i) rad = std::max(rad, std::fabs(hi[i]) + std::fabs(u.h[i]));
        for (int k = 0; k < 128; ++k) {
            Vec t = lat.next();
            Vec y = zero_vec(u.n);
            for (int i = 0; i < u.n; ++i) y[i] = (2.0 * t[i] - 1.0) * 2.0 * rad;
            if (u.inside(y)) continue;
            if (u.exterior_fn(y) > tol)
                throw std::invalid_argument("concave_envelope: exterior rule positive outside the unit ball");
        }
    } else if (u.exterior_const > tol) {
        throw std::invalid_argument("concave_envelope: positive constant exterior rule");
    }
}

// ---------------------------------------------------------------------------
// 1-d: upper chain of the lifted cloud, kept as one plane per chain segment.

std::vector<Plane> upper_chain(std::vector<CloudPoint> pts) {
    std::sort(pts.begin(), pts.end(), [](const CloudPoint& a, const CloudPoint& b) {
        if (a.x[0] != b.x[0]) return a.x[0] < b.x[0];
        return a.z < b.z;
    });
    // Duplicate abscissae keep only the highest lift.
    std::vector<CloudPoint> uniq;
    for (const CloudPoint& p : pts) {
        if (!uniq.empty() && uniq.back().x[0] == p.x[0])
            uniq.back() = p;
        else
            uniq.push_back(p);
    }
    std::vector<CloudPoint> stack;
    for (const CloudPoint& p : uniq) {
        while (stack.size() >= 2) {
            const CloudPoint& a = stack[stack.size() - 2];
            const CloudPoint& b = stack[stack.size() - 1];
            // Pop b when it lies on or below chord a->p (non-concave turn).
            double cross = (b.x[0] - a.x[0]) * (p.z - a.z) - (p.x[0] - a.x[0]) * (b.z - a.z);
            if (cross >= 0)
                stack.pop_back();
            else
                break;
        }
        stack.push_back(p);
    }
    std::vector<Plane> planes;
    if (stack.size() == 1) {
        planes.push_back({zero_vec(1), stack[0].z});
        return planes;
    }
    for (size_t i = 0; i + 1 < stack.size(); ++i) {
        double slope = (stack[i + 1].z - stack[i].z) / (stack[i + 1].x[0] - stack[i].x[0]);
        Plane pl;
        pl.g = vec({slope});
        pl.b = stack[i].z - slope * stack[i].x[0];
        planes.push_back(pl);
    }
    return planes;
}

// ---------------------------------------------------------------------------
// 2-d: incremental convex hull of the lifted cloud; only the upper faces are
// reported as planes.  Exactly coplanar runs of points are tolerated (they
// end up interior to a coarse facet); if the insertion order still produces
// an inconsistent horizon the caller retries with joggled lifts.

struct P3 {
    double x = 0, y = 0, z = 0;
};

P3 sub(const P3& a, const P3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
P3 cross3(const P3& a, const P3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double dot3(const P3& a, const P3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm3(const P3& a) { return std::sqrt(dot3(a, a)); }

struct HullFace {
    int a = 0, b = 0, c = 0;
    P3 n;
    bool alive = true;
};

struct HullDegenerate {};

std::vector<HullFace> hull3(const std::vector<P3>& p, double diam) {
    const double eps_vis = 1e-11 * diam;
    size_t N = p.size();
    if (N < 4) throw HullDegenerate{};

    // Initial simplex: spread-out quadruple.
    size_t i0 = 0;
    for (size_t i = 1; i < N; ++i) {
        const P3 &a = p[i], &b = p[i0];
        if (a.x < b.x || (a.x == b.x && (a.y < b.y || (a.y == b.y && a.z < b.z)))) i0 = i;
    }
    size_t i1 = i0;
    double best = -1;
    for (size_t i = 0; i < N; ++i) {
        double d = norm3(sub(p[i], p[i0]));
        if (d > best) best = d, i1 = i;
    }
    if (best < eps_vis) throw HullDegenerate{};
    size_t i2 = i0;
    best = -1;
    for (size_t i = 0; i < N; ++i) {
        double d = norm3(cross3(sub(p[i1], p[i0]), sub(p[i], p[i0])));
        if (d > best) best = d, i2 = i;
    }
    if (best < eps_vis * eps_vis) throw HullDegenerate{};
    P3 n0 = cross3(sub(p[i1], p[i0]), sub(p[i2], p[i0]));
    size_t i3 = i0;
    best = 0;
    for (size_t i = 0; i < N; ++i) {
        double d = std::fabs(dot3(sub(p[i], p[i0]), n0));
        if (d > best) best = d, i3 = i;
    }
    if (best < eps_vis * norm3(n0)) throw HullDegenerate{};

    P3 centroid{(p[i0].x + p[i1].x + p[i2].x + p[i3].x) / 4, (p[i0].y + p[i1].y + p[i2].y + p[i3].y) / 4,
                (p[i0].z + p[i1].z + p[i2].z + p[i3].z) / 4};

    std::vector<HullFace> faces;
    auto push_face = [&](int a, int b, int c) {
        HullFace f;
        f.a = a;
        f.b = b;
        f.c = c;
        f.n = cross3(sub(p[static_cast<size_t>(b)], p[static_cast<size_t>(a)]),
                     sub(p[static_cast<size_t>(c)], p[static_cast<size_t>(a)]));
        if (dot3(f.n, sub(centroid, p[static_cast<size_t>(a)])) > 0) {
            std::swap(f.b, f.c);
            f.n.x = -f.n.x;
            f.n.y = -f.n.y;
            f.n.z = -f.n.z;
        }
        faces.push_back(f);
    };
    int a0 = static_cast<int>(i0), a1 = static_cast<int>(i1), a2 = static_cast<int>(i2), a3 = static_cast<int>(i3);
    push_face(a0, a1, a2);
    push_face(a0, a1, a3);
    push_face(a0, a2, a3);
    push_face(a1, a2, a3);

    for (size_t i = 0; i < N; ++i) {
        if (i == i0 || i == i1 || i == i2 || i == i3) continue;
        std::vector<size_t> visible;
        for (size_t fi = 0; fi < faces.size(); ++fi) {
            HullFace& f = faces[fi];
            if (!f.alive) continue;
            double nn = norm3(f.n);
            if (nn == 0) continue;
            double d = dot3(sub(p[i], p[static_cast<size_t>(f.a)]), f.n) / nn;
            if (d > eps_vis) visible.push_back(fi);
        }
        if (visible.empty()) continue;
        // Horizon = directed edges of visible faces whose reverse is not in a
        // visible face.
        std::map<std::pair<int, int>, int> edge_count;
        for (size_t fi : visible) {
            const HullFace& f = faces[fi];
            int e[3][2] = {{f.a, f.b}, {f.b, f.c}, {f.c, f.a}};
            for (auto& ed : e) edge_count[{ed[0], ed[1]}]++;
        }
        std::vector<std::pair<int, int>> horizon;
        for (const auto& [edge, cnt] : edge_count) {
            (void)cnt;
            auto rev = edge_count.find({edge.second, edge.first});
            if (rev == edge_count.end()) horizon.push_back(edge);
        }
        if (horizon.empty()) throw HullDegenerate{};
        for (size_t fi : visible) faces[fi].alive = false;
        for (const auto& [u, v] : horizon) push_face(u, v, static_cast<int>(i));
    }
    std::vector<HullFace> out;
    for (const HullFace& f : faces)
        if (f.alive) out.push_back(f);
    return out;
}

std::vector<Plane> upper_planes_2d(const std::vector<CloudPoint>& cloud, uint64_t joggle_salt) {
    std::vector<P3> p(cloud.size());
    double zscale = 0, diam = 0;
    for (size_t i = 0; i < cloud.size(); ++i) {
        p[i] = {cloud[i].x[0], cloud[i].x[1], cloud[i].z};
        zscale = std::max(zscale, std::fabs(cloud[i].z));
        diam = std::max({diam, std::fabs(p[i].x), std::fabs(p[i].y)});
    }
    diam = std::max(diam, zscale) * 2 + 1e-30;
    if (joggle_salt) {
        for (size_t i = 0; i < p.size(); ++i) {
            uint64_t s = joggle_salt + i;
            p[i].z += 1e-12 * (zscale + 1.0) * (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53);
        }
    }
    std::vector<HullFace> faces = hull3(p, diam);
    std::vector<Plane> planes;
    for (const HullFace& f : faces) {
        if (f.n.z <= 1e-12 * norm3(f.n)) continue;  // lower faces and walls
        const P3& A = p[static_cast<size_t>(f.a)];
        double d = dot3(f.n, A);
        Plane pl;
        pl.g = vec({-f.n.x / f.n.z, -f.n.y / f.n.z});
        pl.b = d / f.n.z;
        planes.push_back(pl);
    }
    if (planes.empty()) throw HullDegenerate{};
    return planes;
}

// Vertices of the convex hull of the projected node positions; together with
// the positive nodes they pin down the full upper hull, so the (typically
// dominant) zero part of the cloud can be dropped.
std::vector<size_t> extreme_ring(const std::vector<CloudPoint>& pts) {
    std::vector<size_t> order(pts.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        if (pts[i].x[0] != pts[j].x[0]) return pts[i].x[0] < pts[j].x[0];
        return pts[i].x[1] < pts[j].x[1];
    });
    auto cross2 = [&](size_t o, size_t a, size_t b) {
        return (pts[a].x[0] - pts[o].x[0]) * (pts[b].x[1] - pts[o].x[1]) -
               (pts[a].x[1] - pts[o].x[1]) * (pts[b].x[0] - pts[o].x[0]);
    };
    std::vector<size_t> hull;
    for (int pass = 0; pass < 2; ++pass) {
        size_t start = hull.size();
        for (size_t idx : order) {
            while (hull.size() >= start + 2 && cross2(hull[hull.size() - 2], hull[hull.size() - 1], idx) <= 0)
                hull.pop_back();
            hull.push_back(idx);
        }
        hull.pop_back();
        std::reverse(order.begin(), order.end());
    }
    return hull;
}

}  // namespace

Vec ConcaveEnvelope::gradient(size_t node) const {
    if (node_facets[node].empty()) return zero_vec(gamma.n);
    return facets[static_cast<size_t>(node_facets[node][0])].g;
}

ConcaveEnvelope concave_envelope(const GridFunction& u, const EnvelopeOptions& opt) {
    if (u.n != 1 && u.n != 2)
        throw std::invalid_argument("concave_envelope: hulls are implemented for n = 1, 2 only");
    if (opt.require_nonpositive_outside_b1) check_nonpositive_outside_b1(u);

    ConcaveEnvelope env;
    env.ball_radius = opt.ball_radius;
    if (opt.contact_tol > 0) {
        env.contact_tol = opt.contact_tol;
    } else {
        double hmax = *std::max_element(u.h.c.begin(), u.h.c.begin() + u.n);
        double scale = std::max(std::fabs(u.min_value()), std::fabs(u.max_value()));
        // Interpolation error scale of the data plus a roundoff floor so that
        // exact hull-vertex contacts survive plane-evaluation noise.
        env.contact_tol = std::max(2.0 * robust_curvature_scale(u) * sq(hmax), 1e-12 * (1.0 + scale));
    }
    env.gamma = u;
    env.gamma.exterior_fn = nullptr;
    env.gamma.exterior_const = 0.0;

    size_t total = u.size();
    double R = opt.ball_radius;
    double rtol = 1e-12 * (R + 1.0);

    std::vector<CloudPoint> in_ball;
    bool any_positive = false;
    for (size_t f = 0; f < total; ++f) {
        Vec x = u.node(f);
        if (euclid_norm(x) > R + rtol) continue;
        CloudPoint cp{x, plus(u.values[f]), f};
        any_positive = any_positive || cp.z > 0;
        in_ball.push_back(cp);
    }
    if (in_ball.empty()) throw std::invalid_argument("concave_envelope: grid does not meet the hull ball");

    env.node_facets.assign(total, {});
    env.contact.assign(total, 0);

    if (!any_positive) {
        // u+ vanishes: the zero plane is the envelope.
        env.facets.push_back({zero_vec(u.n), 0.0});
        for (size_t f = 0; f < total; ++f) env.gamma.values[f] = 0.0;
        for (const CloudPoint& cp : in_ball) env.node_facets[cp.node] = {0};
    } else {
        // Pruned cloud: positive nodes plus the extreme nodes of the ball
        // section; all dropped points are zero lifts inside and get dominated.
        std::vector<CloudPoint> cloud;
        for (const CloudPoint& cp : in_ball)
            if (cp.z > 0) cloud.push_back(cp);
        if (u.n == 1) {
            size_t lo = 0, hi = 0;
            for (size_t i = 1; i < in_ball.size(); ++i) {
                if (in_ball[i].x[0] < in_ball[lo].x[0]) lo = i;
                if (in_ball[i].x[0] > in_ball[hi].x[0]) hi = i;
            }
            cloud.push_back(in_ball[lo]);
            cloud.push_back(in_ball[hi]);
            env.facets = upper_chain(std::move(cloud));
        } else {
            for (size_t idx : extreme_ring(in_ball)) cloud.push_back(in_ball[idx]);
            try {
                env.facets = upper_planes_2d(cloud, 0);
            } catch (const HullDegenerate&) {
                env.facets = upper_planes_2d(cloud, 0x5bd1e995u);
            }
        }

        for (size_t f = 0; f < total; ++f) env.gamma.values[f] = 0.0;
        parallel_for_each(in_ball.size(), [&](size_t i) {
            const CloudPoint& cp = in_ball[i];
            double best = std::numeric_limits<double>::infinity();
            for (const Plane& pl : env.facets) best = std::min(best, dot(pl.g, cp.x) + pl.b);
            double tie = opt.tie_tol * (1.0 + std::fabs(best));
            std::vector<int32_t>& ids = env.node_facets[cp.node];
            for (size_t k = 0; k < env.facets.size(); ++k) {
                const Plane& pl = env.facets[k];
                if (dot(pl.g, cp.x) + pl.b <= best + tie) ids.push_back(static_cast<int32_t>(k));
            }
            // The eps-based hull can sit a hair under a skipped lift; clamp so
            // gamma >= u+ holds exactly at nodes.
            env.gamma.values[cp.node] = std::max(best, cp.z);
        });
    }

    for (size_t f = 0; f < total; ++f)
        env.contact[f] = env.gamma.values[f] - u.values[f] <= env.contact_tol ? 1 : 0;
    return env;
}

double convex_hull_measure(std::vector<Vec> pts) {
    if (pts.empty()) return 0;
    int n = pts[0].n;
    if (n == 1) {
        double lo = pts[0][0], hi = pts[0][0];
        for (const Vec& p : pts) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        return hi - lo;
    }
    if (n != 2) throw std::invalid_argument("convex_hull_measure: n = 1, 2 only");
    std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
        if (a[0] != b[0]) return a[0] < b[0];
        return a[1] < b[1];
    });
    auto cross2 = [](const Vec& o, const Vec& a, const Vec& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Vec> hull;
    for (int pass = 0; pass < 2; ++pass) {
        size_t start = hull.size();
        for (const Vec& p : pts) {
            while (hull.size() >= start + 2 && cross2(hull[hull.size() - 2], hull[hull.size() - 1], p) <= 0)
                hull.pop_back();
            hull.push_back(p);
        }
        hull.pop_back();
        std::reverse(pts.begin(), pts.end());
    }
    double area = 0;
    for (size_t i = 0; i < hull.size(); ++i) {
        const Vec& a = hull[i];
        const Vec& b = hull[(i + 1) % hull.size()];
        area += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::fabs(area);
}

double gradient_image_measure(const ConcaveEnvelope& env, const AnisoRect& rect) {
    const GridFunction& g = env.gamma;
    std::vector<char> seen(env.facets.size(), 0);
    std::vector<Vec> grads;
    size_t total = g.size();
    for (size_t f = 0; f < total; ++f) {
        Vec x = g.node(f);
        bool in = true;
        for (int i = 0; i < g.n; ++i) {
            double slack = 1e-12 * (rect.half[i] + 1.0);
            if (std::fabs(x[i] - rect.center[i]) > rect.half[i] + slack) {
                in = false;
                break;
            }
        }
        if (!in) continue;
        for (int32_t id : env.node_facets[f]) {
            if (seen[static_cast<size_t>(id)]) continue;
            seen[static_cast<size_t>(id)] = 1;
            grads.push_back(env.facets[static_cast<size_t>(id)].g);
        }
    }
    if (grads.empty()) return 0;
    return convex_hull_measure(std::move(grads));
}

}  // namespace anlg
