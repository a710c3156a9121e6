#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace stx {

// All randomness in the library flows through Rng. Distributions are
// hand-rolled on top of mt19937_64 so streams are identical across standard
// library implementations, which is what makes seeded runs reproducible.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1).
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    uint64_t uniform_index(uint64_t n) {
        return uint64_t((static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    // Box-Muller; generates pairs, caches the second value.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = size_t(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// FNV-1a, used both for sub-seed derivation and content hashing.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) { return fnv1a(&v, sizeof v, h); }

// Stable sub-stream seed for a named purpose ("augment", "init", ...).
inline uint64_t derive_seed(uint64_t seed, std::string_view tag, uint64_t index = 0) {
    uint64_t h = fnv1a(tag.data(), tag.size());
    h = hash_combine(h, seed);
    h = hash_combine(h, index);
    return h;
}

}  // namespace stx
