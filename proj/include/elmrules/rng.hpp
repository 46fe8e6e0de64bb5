#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

namespace elmrules {

// Deterministic random source. std::uniform_*_distribution is
// implementation-defined, so the value mappings are done by hand here;
// two runs with the same seed produce the same stream on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform in [0, 1), 53 mantissa bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform index in [0, n). Rejection sampling keeps the draw unbiased.
    std::size_t index(std::size_t n) {
        const std::uint64_t span = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = span - span % n;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return static_cast<std::size_t>(x % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 gen_;
};

namespace detail {
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// One global seed fans out to per-component streams via a stable tag,
// e.g. derive_seed(seed, "elm") or derive_seed(seed, "fold", 3).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    return detail::splitmix64(base ^ detail::fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
    return detail::splitmix64(derive_seed(base, tag) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

}  // namespace elmrules
