#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace pcqa {

namespace detail {

// splitmix64; used for seeding and for deriving child streams.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

// Combine an arbitrary list of integers into one seed. Used to derive
// sub-stream seeds from (master seed, tag, indices...) tuples so that every
// consumer of randomness in a run is addressable and reproducible.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t acc = 0x243f6a8885a308d3ULL;
    for (std::uint64_t p : parts) {
        std::uint64_t s = acc ^ p;
        acc = detail::splitmix64(s);
    }
    return acc;
}

// FNV-1a, used for config hashes and for turning string ids into stream keys.
inline std::uint64_t fnv1a(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <typename Str>
std::uint64_t fnv1a_str(const Str& s) {
    return fnv1a(s.data(), s.size());
}

// Deterministic random source (xoshiro256++). The engine and every
// distribution are implemented here so streams are bit-stable across
// standard-library versions; the full state is four u64 words, which makes
// checkpointing trivial.
class Rng {
public:
    Rng() { reseed(0); }
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = detail::splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (cosine branch only, so the engine
    // state is the sole state).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Unbiased integer in [0, n); n must be >= 1.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Child stream keyed by `stream`; does not advance this generator.
    Rng split(std::uint64_t stream) const {
        return Rng(mix_seed({s_[0], s_[1], s_[2], s_[3], stream}));
    }

    std::array<std::uint64_t, 4> state() const { return {s_[0], s_[1], s_[2], s_[3]}; }
    void set_state(const std::array<std::uint64_t, 4>& st) {
        for (int i = 0; i < 4; ++i) s_[i] = st[static_cast<std::size_t>(i)];
    }

private:
    std::uint64_t s_[4];
};

// Fisher-Yates using the supplied source.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i + 1));
        std::swap(v[i], v[j]);
    }
}

} // namespace pcqa
