#include "doctest.h"

#include "dlasso/errors.hpp"
#include "dlasso/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace dlasso;

TEST_CASE("seed derivation separates keys") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 100; ++r)
        for (std::uint64_t s = 0; s < 6; ++s) seen.insert(derive_seed(1, r, s));
    CHECK(seen.size() == 600);
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("streams are reproducible and well scaled") {
    RandomStream a(11), b(11);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    RandomStream c(12);
    double sum = 0.0, sq = 0.0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) {
        const double z = c.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / m) < 0.01);
    CHECK(std::abs(sq / m - 1.0) < 0.02);
    RandomStream u(13);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        CHECK(u.below(7) < 7u);
    }
}

TEST_CASE("shuffle is a permutation") {
    auto idx = shuffled_indices(50, 3);
    CHECK(idx == shuffled_indices(50, 3));
    CHECK(idx != shuffled_indices(50, 4));
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(idx[i] == i);
}
