#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "homogcl/common.hpp"

namespace homogcl {

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

// One deterministic stream of draws. Distributions are implemented by hand
// on top of the engine's standard-defined output so that sequences are
// identical across standard library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; draws are generated in pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    bool bernoulli(double p) {
        if (p < 0.0 || p > 1.0) fail<ConfigError>("bernoulli probability out of [0,1]: ", p);
        if (p == 0.0) { engine_(); return false; }
        if (p == 1.0) { engine_(); return true; }
        return uniform() < p;
    }

    // Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) fail<ConfigError>("uniform_index on empty range");
        // Rejection sampling for an unbiased draw.
        const std::uint64_t span = n;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return static_cast<std::size_t>(x % span);
    }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::swap(p[i - 1], p[uniform_index(i)]);
        }
        return p;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Root generator: splittable by label so that draws made by one module are
// independent of how many draws other modules consumed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    RngStream stream(std::string_view label) const {
        std::uint64_t state = seed_ ^ detail::fnv1a64(label);
        detail::splitmix64(state);
        return RngStream(detail::splitmix64(state));
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace homogcl
