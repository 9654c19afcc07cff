#pragma once

// Naive reference implementations over unpacked +-1 vectors. They share no
// code with the library beyond reading individual bits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "lightfr/binary_code.hpp"
#include "lightfr/corpus.hpp"
#include "lightfr/discrete.hpp"

namespace oracle {

using Signs = std::vector<int>;

inline Signs unpack(const lightfr::BinaryCode& c) {
    Signs s(c.size());
    for (std::uint32_t k = 0; k < c.size(); ++k) s[k] = c.bit(k) ? 1 : -1;
    return s;
}

inline lightfr::BinaryCode pack(const Signs& s) {
    lightfr::BinaryCode c(static_cast<std::uint32_t>(s.size()));
    for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k] > 0) c.set(static_cast<std::uint32_t>(k), 1);
    return c;
}

inline int dot(const Signs& a, const Signs& b) {
    int d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) d += a[k] * b[k];
    return d;
}

inline double sim(const Signs& a, const Signs& b) {
    const double f = static_cast<double>(a.size());
    double agree = 0;
    for (std::size_t k = 0; k < a.size(); ++k) agree += a[k] == b[k] ? 1 : 0;
    return agree / f;  // equals 1/2 + dot/(2f)
}

inline int sum(const Signs& s) { return std::accumulate(s.begin(), s.end(), 0); }

/// One observed rating of the vector being optimized against a fixed partner code.
struct Obs {
    Signs partner;
    double rating;
};

/// sum (r - sim)^2 + lambda (sum_k x_k)^2 for the vector x.
inline double loss(const Signs& x, const std::vector<Obs>& data, double lambda) {
    double l = 0.0;
    for (const auto& o : data) {
        const double e = o.rating - sim(x, o.partner);
        l += e * e;
    }
    const double s = sum(x);
    return l + lambda * s * s;
}

/// Half the loss drop from setting bit k to +1 instead of -1. The DCD score of
/// bit k equals this quantity exactly.
inline double score_by_difference(Signs x, const std::vector<Obs>& data, std::size_t k, double lambda) {
    x[k] = -1;
    const double minus = loss(x, data, lambda);
    x[k] = +1;
    const double plus = loss(x, data, lambda);
    return (minus - plus) / 2.0;
}

/// Sequential per-bit minimization of `loss` with the keep-on-zero rule, scores
/// obtained from loss differences.
inline Signs dcd_by_difference(Signs x, const std::vector<Obs>& data, double lambda) {
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double s = score_by_difference(x, data, k, lambda);
        if (s > 0) x[k] = 1;
        else if (s < 0) x[k] = -1;
    }
    return x;
}

inline Signs random_signs(std::size_t f, std::mt19937_64& g) {
    Signs s(f);
    for (auto& v : s) v = (g() & 1) ? 1 : -1;
    return s;
}

/// Exhaustive minimum of `loss` over {+-1}^f.
inline double brute_force_min(std::size_t f, const std::vector<Obs>& data, double lambda) {
    double best = INFINITY;
    Signs x(f);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << f); ++mask) {
        for (std::size_t k = 0; k < f; ++k) x[k] = (mask >> k) & 1 ? 1 : -1;
        best = std::min(best, loss(x, data, lambda));
    }
    return best;
}

/// Client-side gradient of one (b, d, r) triple straight from the definition.
inline std::vector<double> item_gradient(const Signs& b, const Signs& d, double r) {
    const std::size_t f = b.size();
    std::vector<double> g(f);
    for (std::size_t k = 0; k < f; ++k) {
        int rest = 0;
        for (std::size_t j = 0; j < f; ++j)
            if (j != k) rest += b[j] * d[j];
        g[k] = (r - 0.5 - rest / (2.0 * f)) * b[k];
    }
    return g;
}

}  // namespace oracle
