#include "dlasso/rng.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace dlasso {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                          std::uint64_t stream) noexcept {
    return mix64(mix64(mix64(master) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

double RandomStream::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1.
    const std::uint64_t k = engine_() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = two_pi * uniform();
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = engine_();
    } while (draw >= limit);
    return draw % bound;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RandomStream rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace dlasso
