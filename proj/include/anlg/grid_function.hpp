#pragma once

#include <string>

#include "anlg/core.hpp"

namespace anlg {

/// Dense node-centered grid sample of a scalar function.  Nodes sit at
/// lo + idx * h componentwise, idx_i in [0, dims_i); the covered closed box is
/// [lo, hi] with hi = lo + (dims - 1) h.  eval() interpolates multilinearly
/// inside the box and defers to the exterior rule outside: exterior_fn when
/// set, the constant otherwise.  Storage is row-major with the last axis
/// fastest.
struct GridFunction {
    int n = 0;
    Vec lo;
    Vec h;
    std::array<int, kMaxDim> dims{};
    std::vector<double> values;
    double exterior_const = 0.0;
    std::function<double(const Vec&)> exterior_fn;

    size_t size() const;
    Vec hi() const;

    size_t flat(const std::array<int, kMaxDim>& idx) const;
    std::array<int, kMaxDim> unflat(size_t f) const;
    Vec node(size_t f) const;
    Vec node(const std::array<int, kMaxDim>& idx) const;

    double& at(const std::array<int, kMaxDim>& idx) { return values[flat(idx)]; }
    double at(const std::array<int, kMaxDim>& idx) const { return values[flat(idx)]; }

    /// Closed-box membership with a relative slack of a few ulps so nodes on
    /// the boundary always interpolate rather than fall outside.
    bool inside(const Vec& x) const;

    double eval(const Vec& x) const;

    double min_value() const;
    double max_value() const;
    double node_volume() const;  // prod h_i
};

/// Grid over the closed box [lo, hi] with the given node counts (>= 2 each).
GridFunction make_grid(const Vec& lo, const Vec& hi, const std::array<int, kMaxDim>& dims);

/// Same box along every axis: [-half, half]^n with `nodes` nodes per axis.
GridFunction make_cube_grid(int n, double half, int nodes);

void fill_grid(GridFunction& g, const std::function<double(const Vec&)>& f);

/// Max norm of the discrete second difference quotient along grid axes,
///   max_i max_x |u(x+h_i e_i) - 2 u(x) + u(x-h_i e_i)| / h_i^2,
/// a grid stand-in for the Hessian bound that drives interpolation error.
double grid_hessian_bound(const GridFunction& g);

// ---------------------------------------------------------------------------
// Serialization.  The binary layout is little-endian:
//   magic "ANLG" | u16 version (=1) | u16 n | u64 dims[n]
//   | f64 lo[n] | f64 h[n] | f64 exterior_const | f64 values[prod dims]
// A callable exterior rule is not serializable; save_grid throws if one is
// set, so round trips are lossless.

void save_grid(const GridFunction& g, const std::string& path);
GridFunction load_grid(const std::string& path);

/// CSV with a header row: x0,...,x{n-1},value; one node per line.
void save_grid_csv(const GridFunction& g, const std::string& path);

}  // namespace anlg
