#include "anlg/grid_function.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace anlg {

size_t GridFunction::size() const {
    size_t s = 1;
    for (int i = 0; i < n; ++i) s *= static_cast<size_t>(dims[static_cast<size_t>(i)]);
    return s;
}

Vec GridFunction::hi() const {
    Vec v = lo;
    for (int i = 0; i < n; ++i) v[i] += h[i] * static_cast<double>(dims[static_cast<size_t>(i)] - 1);
    return v;
}

size_t GridFunction::flat(const std::array<int, kMaxDim>& idx) const {
    size_t f = 0;
    for (int i = 0; i < n; ++i) f = f * static_cast<size_t>(dims[static_cast<size_t>(i)]) + static_cast<size_t>(idx[static_cast<size_t>(i)]);
    return f;
}

std::array<int, kMaxDim> GridFunction::unflat(size_t f) const {
    std::array<int, kMaxDim> idx{};
    for (int i = n - 1; i >= 0; --i) {
        size_t d = static_cast<size_t>(dims[static_cast<size_t>(i)]);
        idx[static_cast<size_t>(i)] = static_cast<int>(f % d);
        f /= d;
    }
    return idx;
}

Vec GridFunction::node(const std::array<int, kMaxDim>& idx) const {
    Vec v = lo;
    for (int i = 0; i < n; ++i) v[i] += h[i] * static_cast<double>(idx[static_cast<size_t>(i)]);
    return v;
}

Vec GridFunction::node(size_t f) const { return node(unflat(f)); }

bool GridFunction::inside(const Vec& x) const {
    for (int i = 0; i < n; ++i) {
        double extent = h[i] * static_cast<double>(dims[static_cast<size_t>(i)] - 1);
        double slack = 1e-12 * (std::fabs(lo[i]) + extent + 1.0);
        if (x[i] < lo[i] - slack || x[i] > lo[i] + extent + slack) return false;
    }
    return true;
}

double GridFunction::eval(const Vec& x) const {
    if (!inside(x)) return exterior_fn ? exterior_fn(x) : exterior_const;
    std::array<int, kMaxDim> base{};
    std::array<double, kMaxDim> t{};
    for (int i = 0; i < n; ++i) {
        int d = dims[static_cast<size_t>(i)];
        double u = (x[i] - lo[i]) / h[i];
        int b = static_cast<int>(std::floor(u));
        b = std::clamp(b, 0, d - 2);
        base[static_cast<size_t>(i)] = b;
        t[static_cast<size_t>(i)] = std::clamp(u - static_cast<double>(b), 0.0, 1.0);
    }
    double acc = 0;
    for (int corner = 0; corner < (1 << n); ++corner) {
        std::array<int, kMaxDim> idx = base;
        double w = 1;
        for (int i = 0; i < n; ++i) {
            if (corner & (1 << i)) {
                idx[static_cast<size_t>(i)] += 1;
                w *= t[static_cast<size_t>(i)];
            } else {
                w *= 1.0 - t[static_cast<size_t>(i)];
            }
        }
        if (w != 0.0) acc += w * values[flat(idx)];
    }
    return acc;
}

double GridFunction::min_value() const { return *std::min_element(values.begin(), values.end()); }
double GridFunction::max_value() const { return *std::max_element(values.begin(), values.end()); }

double GridFunction::node_volume() const {
    double v = 1;
    for (int i = 0; i < n; ++i) v *= h[i];
    return v;
}

GridFunction make_grid(const Vec& lo, const Vec& hi, const std::array<int, kMaxDim>& dims) {
    GridFunction g;
    g.n = lo.n;
    g.lo = lo;
    g.h = zero_vec(lo.n);
    g.dims = dims;
    for (int i = 0; i < g.n; ++i) {
        int d = dims[static_cast<size_t>(i)];
        if (d < 2) throw std::invalid_argument("make_grid: need at least 2 nodes per axis");
        if (!(hi[i] > lo[i])) throw std::invalid_argument("make_grid: empty box");
        g.h[i] = (hi[i] - lo[i]) / static_cast<double>(d - 1);
    }
    g.values.assign(g.size(), 0.0);
    return g;
}

GridFunction make_cube_grid(int n, double half, int nodes) {
    Vec lo = zero_vec(n), hi = zero_vec(n);
    std::array<int, kMaxDim> dims{};
    for (int i = 0; i < n; ++i) {
        lo[i] = -half;
        hi[i] = half;
        dims[static_cast<size_t>(i)] = nodes;
    }
    return make_grid(lo, hi, dims);
}

void fill_grid(GridFunction& g, const std::function<double(const Vec&)>& f) {
    size_t total = g.size();
    parallel_for_each(total, [&](size_t i) { g.values[i] = f(g.node(i)); });
}

double grid_hessian_bound(const GridFunction& g) {
    double worst = 0;
    size_t total = g.size();
    for (size_t f = 0; f < total; ++f) {
        std::array<int, kMaxDim> idx = g.unflat(f);
        for (int i = 0; i < g.n; ++i) {
            int d = g.dims[static_cast<size_t>(i)];
            int c = idx[static_cast<size_t>(i)];
            if (c < 1 || c > d - 2) continue;
            std::array<int, kMaxDim> lo_i = idx, hi_i = idx;
            lo_i[static_cast<size_t>(i)] -= 1;
            hi_i[static_cast<size_t>(i)] += 1;
            double dd = std::fabs(g.at(hi_i) - 2.0 * g.values[f] + g.at(lo_i)) / (g.h[i] * g.h[i]);
            worst = std::max(worst, dd);
        }
    }
    return worst;
}

namespace {

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("load_grid: truncated file");
    return v;
}

}  // namespace

void save_grid(const GridFunction& g, const std::string& path) {
    if (g.exterior_fn) throw std::invalid_argument("save_grid: callable exterior rule is not serializable");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_grid: cannot open " + path);
    out.write("ANLG", 4);
    put<uint16_t>(out, 1);
    put<uint16_t>(out, static_cast<uint16_t>(g.n));
    for (int i = 0; i < g.n; ++i) put<uint64_t>(out, static_cast<uint64_t>(g.dims[static_cast<size_t>(i)]));
    for (int i = 0; i < g.n; ++i) put<double>(out, g.lo[i]);
    for (int i = 0; i < g.n; ++i) put<double>(out, g.h[i]);
    put<double>(out, g.exterior_const);
    out.write(reinterpret_cast<const char*>(g.values.data()),
              static_cast<std::streamsize>(g.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("save_grid: write failed for " + path);
}

GridFunction load_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_grid: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ANLG", 4) != 0) throw std::runtime_error("load_grid: bad magic in " + path);
    uint16_t version = get<uint16_t>(in);
    if (version != 1) throw std::runtime_error("load_grid: unsupported version");
    GridFunction g;
    g.n = static_cast<int>(get<uint16_t>(in));
    if (g.n < 1 || g.n > kMaxDim) throw std::runtime_error("load_grid: bad dimension");
    g.lo = zero_vec(g.n);
    g.h = zero_vec(g.n);
    for (int i = 0; i < g.n; ++i) {
        uint64_t d = get<uint64_t>(in);
        if (d < 2 || d > (1u << 24)) throw std::runtime_error("load_grid: bad dims");
        g.dims[static_cast<size_t>(i)] = static_cast<int>(d);
    }
    for (int i = 0; i < g.n; ++i) g.lo[i] = get<double>(in);
    for (int i = 0; i < g.n; ++i) g.h[i] = get<double>(in);
    g.exterior_const = get<double>(in);
    g.values.resize(g.size());
    in.read(reinterpret_cast<char*>(g.values.data()),
            static_cast<std::streamsize>(g.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("load_grid: truncated values in " + path);
    return g;
}

void save_grid_csv(const GridFunction& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_grid_csv: cannot open " + path);
    for (int i = 0; i < g.n; ++i) out << "x" << i << ",";
    out << "value\n";
    char buf[64];
    size_t total = g.size();
    for (size_t f = 0; f < total; ++f) {
        Vec x = g.node(f);
        for (int i = 0; i < g.n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,", x[i]);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", g.values[f]);
        out << buf;
    }
}

}  // namespace anlg
