#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nashseek/errors.hpp"
#include "nashseek/game.hpp"
#include "nashseek/rng.hpp"

namespace nashseek {

enum class MuMode {
    Constant,       // mu_t = mu0
    Harmonic,       // mu_t = max(mu0 / (t+1), mu_min)
    PlayerIndexed,  // mu = mu0 / (j+2) for 0-based player j, constant in t
};

inline std::string to_string(MuMode m) {
    switch (m) {
        case MuMode::Constant: return "constant";
        case MuMode::Harmonic: return "harmonic";
        case MuMode::PlayerIndexed: return "player";
    }
    return "?";
}

inline MuMode mu_mode_from_string(const std::string& s) {
    if (s == "constant") return MuMode::Constant;
    if (s == "harmonic") return MuMode::Harmonic;
    if (s == "player") return MuMode::PlayerIndexed;
    throw ValidationError("unknown mu_mode '" + s + "' (expected constant|harmonic|player)");
}

// Smoothing parameter schedule. Harmonic decay keeps a small positive floor:
// the difference quotient divides by mu, and an exactly vanishing mu would
// hit catastrophic cancellation long before the limit matters.
struct SmoothingSchedule {
    double mu0 = 0.1;
    MuMode mode = MuMode::Harmonic;
    double mu_min = 1e-8;

    double value(std::int64_t t, int player) const {
        switch (mode) {
            case MuMode::Constant:
                return mu0;
            case MuMode::Harmonic:
                return std::max(mu0 / static_cast<double>(t + 1), mu_min);
            case MuMode::PlayerIndexed:
                return mu0 / static_cast<double>(player + 2);
        }
        return mu0;
    }

    bool valid() const { return mu0 > 0.0 && mu_min >= 0.0; }
};

// One evaluation of the randomized gradient-free oracle for player (i, j):
// a single Gaussian direction xi over the coalition block and the resulting
// estimate pi_k = ((f(x + mu*xi) - f(x)) / mu) * xi_k for every k. One draw
// serves all k, which is what makes the tracker variance analysis go through.
struct OracleSample {
    int coalition = 0;
    int player = 0;
    std::vector<double> direction;  // xi, length n_i
    std::vector<double> values;     // pi_k, length n_i
    double mu_used = 0.0;
    double base_cost = 0.0;         // f(x)
};

inline std::vector<double> draw_direction(NormalStream& rng, int n_i) {
    std::vector<double> xi(static_cast<std::size_t>(n_i));
    rng.fill(xi);
    return xi;
}

// Exactly two cost evaluations. The perturbed point is deliberately not
// projected onto the box.
inline OracleSample oracle_pi(const GameSpec& game, int i, int j, std::span<const double> x,
                              double mu, std::span<const double> xi) {
    if (!(mu > 0.0)) throw ValidationError("oracle_pi: mu must be > 0");
    const int n_i = game.coalition_size(i);
    if (static_cast<int>(xi.size()) != n_i) {
        throw ValidationError("oracle_pi: direction length " + std::to_string(xi.size()) +
                              " != coalition size " + std::to_string(n_i));
    }
    game.check_profile(x);

    OracleSample sample;
    sample.coalition = i;
    sample.player = j;
    sample.mu_used = mu;
    sample.direction.assign(xi.begin(), xi.end());
    sample.base_cost = game.evaluate(i, j, x);

    std::vector<double> shifted(x.begin(), x.end());
    const int off = game.coalition_offset(i);
    for (int k = 0; k < n_i; ++k) shifted[static_cast<std::size_t>(off + k)] += mu * xi[static_cast<std::size_t>(k)];
    const double perturbed = game.evaluate(i, j, shifted);

    const double diff_over_mu = (perturbed - sample.base_cost) / mu;
    sample.values.resize(static_cast<std::size_t>(n_i));
    for (int k = 0; k < n_i; ++k) sample.values[static_cast<std::size_t>(k)] = diff_over_mu * xi[static_cast<std::size_t>(k)];
    return sample;
}

struct MonteCarloEstimate {
    double estimate = 0.0;
    double stderr_est = 0.0;
    std::int64_t samples = 0;
};

// Monte-Carlo estimate of the Gaussian-smoothed cost f_mu(x) for player
// (i, j): mean of f(x^i + mu*xi, x^{-i}) over fresh directions.
inline MonteCarloEstimate smoothed_value(const GameSpec& game, int i, int j,
                                         std::span<const double> x, double mu,
                                         std::int64_t samples, NormalStream& rng) {
    if (samples < 1) throw ValidationError("smoothed_value: samples must be >= 1");
    if (!(mu > 0.0)) throw ValidationError("smoothed_value: mu must be > 0");
    game.check_profile(x);
    const int n_i = game.coalition_size(i);
    const int off = game.coalition_offset(i);

    std::vector<double> shifted(x.begin(), x.end());
    double mean = 0.0, m2 = 0.0;
    for (std::int64_t s = 0; s < samples; ++s) {
        for (int k = 0; k < n_i; ++k) {
            shifted[static_cast<std::size_t>(off + k)] = x[static_cast<std::size_t>(off + k)] + mu * rng.next();
        }
        const double v = game.evaluate(i, j, shifted);
        const double delta = v - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (v - mean);
    }
    MonteCarloEstimate out;
    out.estimate = mean;
    out.samples = samples;
    out.stderr_est = samples > 1
                         ? std::sqrt(m2 / (static_cast<double>(samples) * static_cast<double>(samples - 1)))
                         : 0.0;
    return out;
}

// Checks f(x) <= f_mu(x) <= f(x) + mu*D within three standard errors of the
// Monte-Carlo estimate. D must be a Lipschitz bound for the player's cost.
inline bool check_sandwich(const GameSpec& game, int i, int j, std::span<const double> x,
                           double mu, double lipschitz_d, std::int64_t samples,
                           NormalStream& rng) {
    const MonteCarloEstimate mc = smoothed_value(game, i, j, x, mu, samples, rng);
    const double f0 = game.evaluate(i, j, x);
    const double slack = 3.0 * mc.stderr_est;
    return f0 - slack <= mc.estimate && mc.estimate <= f0 + mu * lipschitz_d + slack;
}

}  // namespace nashseek
