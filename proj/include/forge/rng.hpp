#pragma once

#include "forge/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace forge {

/// Seeded random stream. The engine is std::mt19937_64 (bit-exact across
/// platforms); the double-valued draws are derived from raw 64-bit words
/// here rather than through std::*_distribution, whose output is
/// implementation-defined. This keeps serialized samples reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (pairwise, one value cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Vector normal_vector(Index d) {
        Vector v(d);
        for (Index i = 0; i < d; ++i) v[i] = normal();
        return v;
    }

    /// Uniform direction on the unit sphere S^{d-1}.
    Vector unit_vector(Index d) {
        Vector v = normal_vector(d);
        double n = v.norm();
        while (n == 0.0) {
            v = normal_vector(d);
            n = v.norm();
        }
        return v / n;
    }

    /// k distinct indices drawn from [0, n), in draw order.
    std::vector<Index> sample_without_replacement(Index n, Index k) {
        // Floyd's algorithm; fine for the k << n regime used here.
        std::vector<Index> out;
        out.reserve(static_cast<std::size_t>(k));
        for (Index j = n - k; j < n; ++j) {
            const Index t = static_cast<Index>(below(static_cast<std::uint64_t>(j) + 1));
            if (std::find(out.begin(), out.end(), t) == out.end()) {
                out.push_back(t);
            } else {
                out.push_back(j);
            }
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace forge
