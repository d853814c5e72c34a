#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dlasso {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/**
 * Child seed keyed on (master, index, stream). Every replication and every
 * sub-task inside it gets its own key, so results never depend on which
 * worker ran a task or in what order.
 */
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                          std::uint64_t stream = 0) noexcept;

/// Platform-independent random stream: mt19937_64 plus hand-rolled transforms.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller; draws come in cached pairs.
    double normal();
    /// Uniform integer in [0, bound) by rejection, bound > 0.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace dlasso
