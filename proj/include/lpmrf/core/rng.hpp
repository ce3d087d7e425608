// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

#include "lpmrf/core/error.hpp"

namespace lpmrf {

// Self-contained counter-free PRNG (xoshiro256++ seeded through splitmix64).
// We do not use <random> distributions: their output is implementation
// defined, and reproducibility of every artifact is part of the contract.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) {
        uint64_t x = seed ^ (0x9e3779b97f4a7c15ull * (stream + 1));
        for (auto& word : s_) word = splitmix64(x);
        // Discard a few outputs so nearby seeds decorrelate.
        for (int i = 0; i < 8; ++i) next_u64();
    }

    // Deterministic child stream, independent of draws made so far.
    Rng split(uint64_t stream) const {
        uint64_t x = s_[0] ^ (s_[2] * 0xbf58476d1ce4e5b9ull);
        return Rng(x, stream);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive integer range.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        LPMRF_REQUIRE(hi >= lo, ParamError, "uniform_int: empty range [", lo, ", ", hi, "]");
        const uint64_t span = uint64_t(hi - lo) + 1;
        return lo + int64_t(next_u64() % span);
    }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <class T>
    void fill_normal(T* data, int64_t n, double mean, double stddev) {
        for (int64_t i = 0; i < n; ++i) data[i] = T(normal(mean, stddev));
    }

    template <class T>
    void fill_uniform(T* data, int64_t n, double lo, double hi) {
        for (int64_t i = 0; i < n; ++i) data[i] = T(uniform(lo, hi));
    }

private:
    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stable 64-bit hash for deriving per-sample seeds from (base seed, index).
inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ull;
    x ^= x >> 33;
    return x;
}

}  // namespace lpmrf
