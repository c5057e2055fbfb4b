#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

namespace rgf {

/// SplitMix64 step. Used to expand a single 64-bit seed into generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna), seeded through SplitMix64.
///
/// Every random quantity in the library is derived from this generator with
/// the fixed conversions below, so results reproduce across platforms and
/// across reimplementations in other languages:
///   uniform01()  = (next() >> 11) * 2^-53                 in [0, 1)
///   below(k)     = high 64 bits of next() * k              in [0, k)
///   normal()     = Box-Muller on (1 - uniform01(), uniform01()),
///                  cosine branch first, sine branch cached for the next call
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return next(); }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t below(std::uint64_t k) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * k) >> 64);
    }

    double normal() {
        if (cached_normal_) {
            const double z = *cached_normal_;
            cached_normal_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_normal_ = radius * std::sin(angle);
        return radius * std::cos(angle);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    std::optional<double> cached_normal_;
};

/// In-place Fisher-Yates shuffle driven by Rng::below (std::shuffle's
/// algorithm is implementation-defined, so it is not used for anything that
/// must reproduce).
template <typename Container>
void shuffle(Container& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace rgf
