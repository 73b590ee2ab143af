#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nashseek/rng.hpp"

using namespace nashseek;

TEST_CASE("splitmix64 streams replay bit-for-bit") {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    SplitMix64 c(43);
    bool any_diff = false;
    SplitMix64 a2(42);
    for (int i = 0; i < 16; ++i) any_diff = any_diff || (a2.next_u64() != c.next_u64());
    REQUIRE(any_diff);
}

TEST_CASE("uniform draws stay in their ranges") {
    SplitMix64 rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = rng.next_open_unit();
        REQUIRE(v > 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("derived stream seeds differ per index") {
    const std::uint64_t master = 123;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 64; ++i) seeds.push_back(derive_stream_seed(master, i));
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = i + 1; j < seeds.size(); ++j) REQUIRE(seeds[i] != seeds[j]);
    REQUIRE(derive_stream_seed(master, 0) != derive_stream_seed(master + 1, 0));
}

TEST_CASE("normal stream replays and matches N(0,1) moments") {
    NormalStream a(11), b(11);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next() == b.next());

    // CLT bounds: stderr of the mean is 1e-3, of the variance ~1.41e-3.
    NormalStream rng(2024);
    const int n = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next();
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    REQUIRE(std::abs(mean) <= 3e-3);
    REQUIRE(std::abs(var - 1.0) <= 5e-3);
}
