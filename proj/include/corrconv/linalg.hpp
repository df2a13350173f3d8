#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "corrconv/rng.hpp"

namespace corrconv {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline double sum(const Vec& a) {
    double acc = 0.0;
    for (double v : a) acc += v;
    return acc;
}

inline void scale_inplace(Vec& a, double c) {
    for (double& v : a) v *= c;
}

/// a += c * b
inline void axpy(Vec& a, double c, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

inline void normalize_inplace(Vec& a) {
    const double n = norm2(a);
    if (n == 0.0) throw std::domain_error("normalize: zero vector");
    scale_inplace(a, 1.0 / n);
}

inline Vec random_unit_vector(std::size_t n, std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    Vec v(n);
    for (double& x : v) x = rng.gaussian();
    double nn = norm2(v);
    if (nn == 0.0) {  // all-zero draw is not reachable in practice
        v.assign(n, 0.0);
        v[0] = 1.0;
        nn = 1.0;
    }
    scale_inplace(v, 1.0 / nn);
    return v;
}

} // namespace corrconv
