#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace anlg {

// Supported dimensions are 1..3; capacity 4 keeps the struct POD-friendly.
inline constexpr int kMaxDim = 4;

struct Vec {
    int n = 0;
    std::array<double, kMaxDim> c{};

    double& operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }
};

inline Vec vec(std::initializer_list<double> xs) {
    if (xs.size() == 0 || xs.size() > kMaxDim) throw std::invalid_argument("vec: bad dimension");
    Vec v;
    v.n = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) v.c[static_cast<size_t>(i++)] = x;
    return v;
}

inline Vec zero_vec(int n) {
    if (n < 1 || n > kMaxDim) throw std::invalid_argument("zero_vec: bad dimension");
    Vec v;
    v.n = n;
    return v;
}

inline Vec operator+(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.n; ++i) r[i] += b[i];
    return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.n; ++i) r[i] -= b[i];
    return r;
}

inline Vec operator*(double s, const Vec& a) {
    Vec r = a;
    for (int i = 0; i < a.n; ++i) r[i] *= s;
    return r;
}

inline Vec operator-(const Vec& a) { return -1.0 * a; }

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}

inline double euclid_norm_sq(const Vec& a) { return dot(a, a); }
inline double euclid_norm(const Vec& a) { return std::sqrt(euclid_norm_sq(a)); }

inline double sq(double x) { return x * x; }

/// |x|^p by repeated multiplication when p is a small integer, exp/log otherwise.
/// Integer powers keep bit-exact symmetry between x and -x for free; the
/// pow() path does too since it only sees |x|.
inline double abs_pow(double x, double p) {
    double a = std::fabs(x);
    double ip = 0;
    if (std::modf(p, &ip) == 0.0 && ip >= 0 && ip <= 16) {
        double r = 1;
        for (int k = 0; k < static_cast<int>(ip); ++k) r *= a;
        return r;
    }
    if (a == 0.0) return p == 0.0 ? 1.0 : 0.0;
    return std::pow(a, p);
}

// ---------------------------------------------------------------------------
// Deterministic RNG plumbing. Every random draw in the library flows from a
// single u64 seed through splitmix64; derived streams get seed ^ tag.

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next_u64() { return splitmix64(state); }

    /// Uniform in [0,1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a,b).
    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    /// Derive an independent stream for a named purpose.
    Rng split(uint64_t tag) const {
        uint64_t s = state ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
        Rng r(s);
        r.next_u64();
        return r;
    }
};

/// Additive Kronecker lattice in [0,1)^n, shifted by a seeded offset.
/// Low-discrepancy, deterministic, and cheap; good enough for the inclusion
/// certificates and volume checks which only need equidistribution.
struct LatticeSampler {
    int n;
    std::array<double, kMaxDim> alpha{};
    std::array<double, kMaxDim> shift{};
    uint64_t index = 0;

    LatticeSampler(int dim, uint64_t seed) : n(dim) {
        // Square roots of distinct primes are badly approximable, which is
        // what drives the low discrepancy of the lattice.
        static const double roots[kMaxDim] = {std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0),
                                              std::sqrt(7.0)};
        Rng r(seed);
        for (int i = 0; i < n; ++i) {
            alpha[static_cast<size_t>(i)] = roots[i] - std::floor(roots[i]);
            shift[static_cast<size_t>(i)] = r.next_double();
        }
    }

    Vec next() {
        Vec v = zero_vec(n);
        ++index;
        for (int i = 0; i < n; ++i) {
            double t = shift[static_cast<size_t>(i)] + static_cast<double>(index) * alpha[static_cast<size_t>(i)];
            v[i] = t - std::floor(t);
        }
        return v;
    }
};

// ---------------------------------------------------------------------------
// Thread budget shared by all parallel loops. parallel_for writes results into
// caller-owned slots, so the outcome is identical for any thread count.

int thread_budget();
void set_thread_budget(int n);

void parallel_for(size_t count, const std::function<void(size_t, size_t)>& body);

/// Convenience wrapper: run body(i) for i in [0,count).
inline void parallel_for_each(size_t count, const std::function<void(size_t)>& body) {
    parallel_for(count, [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) body(i);
    });
}

}  // namespace anlg
