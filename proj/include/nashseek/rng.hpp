#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace nashseek {

// Name recorded in run metadata so outputs can be reproduced bit-exactly.
inline constexpr const char* kRngAlgorithm = "splitmix64-boxmuller";

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based uniform stream (splitmix64). The k-th output is a pure
// function of (seed, k), so streams replay identically on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // uniform in [0, 1)
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1]; never returns 0, safe under log()
    double next_open_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Derives an independent child seed, e.g. one stream per player.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master + 0x9E3779B97F4A7C15ULL) ^ mix64(index + 0xBF58476D1CE4E5B9ULL));
}

// Standard normal draws via Box-Muller over a SplitMix64 stream. The pair's
// second value is cached, so draw order is part of the reproducibility
// contract.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : uniform_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_.next_open_unit();
        const double u2 = uniform_.next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    void fill(std::span<double> out) {
        for (double& v : out) v = next();
    }

private:
    SplitMix64 uniform_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace nashseek
