#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nashseek/analysis.hpp"
#include "nashseek/game.hpp"
#include "nashseek/graph.hpp"
#include "nashseek/seeker.hpp"
#include "nashseek/smoothing.hpp"

namespace nashseek {

// Four-coalition Cournot competition, six producers per coalition. Producer
// j of coalition i pays a production cost
//   c(a) = 5a^2 + 5a + 5|a - 6j|      (j counted 1-based, a = own quantity)
// and earns a*p, where the coalition price couples the j-th producers across
// coalitions:
//   p1 = 60 - x1_j - x2_j - x3_j - x4_j
//   p2 = 60 - x2_j
//   p3 = 60 - x1_j - x2_j
//   p4 = 60 - x1_j - x2_j - x3_j
inline constexpr int kCournotCoalitions = 4;
inline constexpr int kCournotPlayers = 6;

namespace detail {

inline double cournot_price(int i, int j, std::span<const double> x) {
    const double x1 = x[static_cast<std::size_t>(0 * kCournotPlayers + j)];
    const double x2 = x[static_cast<std::size_t>(1 * kCournotPlayers + j)];
    const double x3 = x[static_cast<std::size_t>(2 * kCournotPlayers + j)];
    const double x4 = x[static_cast<std::size_t>(3 * kCournotPlayers + j)];
    switch (i) {
        case 0: return 60.0 - x1 - x2 - x3 - x4;
        case 1: return 60.0 - x2;
        case 2: return 60.0 - x1 - x2;
        case 3: return 60.0 - x1 - x2 - x3;
        default: throw ValidationError("cournot: coalition index out of range");
    }
}

inline double sign_or_zero(double z) {
    if (z > 0.0) return 1.0;
    if (z < 0.0) return -1.0;
    return 0.0;  // minimal-norm subgradient at the kink
}

}  // namespace detail

inline double cournot_cost(int i, int j, std::span<const double> x) {
    const double a = x[static_cast<std::size_t>(i * kCournotPlayers + j)];
    const double kink = 6.0 * (j + 1);
    const double production = 5.0 * a * a + 5.0 * a + 5.0 * std::abs(a - kink);
    return production - a * detail::cournot_price(i, j, x);
}

// d f^i_j / d x^i_j with the kink resolved to 0; all other own-coalition
// partials vanish for this game (prices couple across coalitions only).
inline double cournot_own_partial(int i, int j, std::span<const double> x) {
    const double a = x[static_cast<std::size_t>(i * kCournotPlayers + j)];
    const double x1 = x[static_cast<std::size_t>(0 * kCournotPlayers + j)];
    const double x2 = x[static_cast<std::size_t>(1 * kCournotPlayers + j)];
    const double x3 = x[static_cast<std::size_t>(2 * kCournotPlayers + j)];
    const double s = detail::sign_or_zero(a - 6.0 * (j + 1));
    switch (i) {
        case 0: return 12.0 * a + (x2 + x3 + x[static_cast<std::size_t>(3 * kCournotPlayers + j)]) - 55.0 + 5.0 * s;
        case 1: return 12.0 * a - 55.0 + 5.0 * s;
        case 2: return 10.0 * a + x1 + x2 - 55.0 + 5.0 * s;
        case 3: return 10.0 * a + x1 + x2 + x3 - 55.0 + 5.0 * s;
        default: throw ValidationError("cournot: coalition index out of range");
    }
}

inline std::vector<double> cournot_subgradient(int i, int j, std::span<const double> x) {
    std::vector<double> grad(kCournotPlayers, 0.0);
    grad[static_cast<std::size_t>(j)] = cournot_own_partial(i, j, x);
    return grad;
}

// The action box is not part of the published game data; [0, 60] keeps
// quantities nonnegative and prices above -120, and is recorded in every
// report.
inline constexpr BoxConstraint kCournotDefaultBox{0.0, 60.0};

inline GameSpec build_cournot(const BoxConstraint& box = kCournotDefaultBox,
                              const std::optional<CoalitionGraph>& graph = {}) {
    const CoalitionGraph g = graph ? *graph : build_ring(kCournotPlayers, 0.5);
    if (g.size() != kCournotPlayers) {
        throw ValidationError("build_cournot: coalition graph must have size 6");
    }
    std::vector<PlayerSpec> players;
    players.reserve(kCournotCoalitions * kCournotPlayers);
    for (int i = 0; i < kCournotCoalitions; ++i) {
        for (int j = 0; j < kCournotPlayers; ++j) {
            PlayerSpec p;
            p.coalition = i;
            p.player = j;
            p.box = box;
            p.cost.evaluate = [i, j](std::span<const double> x) { return cournot_cost(i, j, x); };
            p.subgradient = [i, j](std::span<const double> x) {
                return cournot_subgradient(i, j, x);
            };
            players.push_back(std::move(p));
        }
    }
    std::vector<CoalitionGraph> graphs(kCournotCoalitions, g);
    return assemble_game(std::move(players), std::move(graphs));
}

struct BenchmarkOptions {
    std::vector<double> alphas{0.02, 0.05, 0.1};
    std::int64_t iters = 3000;
    std::vector<std::uint64_t> seeds{1};
    SmoothingSchedule mu{0.1, MuMode::Harmonic, 1e-8};
    std::optional<double> chi;  // estimated from sampled pairs when absent
    double mu_ref = 0.05;
    double tol = 1e-8;  // reference solver tolerance
    std::int64_t lipschitz_samples = 2000;
    std::int64_t chi_samples = 2000;
    double gamma0 = 0.5;
    int threads = 1;
    std::int64_t record_every = 1;
    std::uint64_t analysis_seed = 99;
    std::string topology = "ring(n=6, self_weight=0.5) per coalition";
};

struct BenchmarkRun {
    double alpha = 0.0;
    std::uint64_t seed = 0;
    bool admissible = false;  // alpha < alpha_max for the computed constants
    RunRecord record;
    double initial_gap = 0.0;
    double final_gap = 0.0;
    double steady_gap = 0.0;               // mean gap over the last 10% of recorded steps
    std::int64_t half_gap_iteration = -1;  // first t with gap <= initial/2
};

struct BenchmarkReport {
    ActionProfile x_star;
    double vi_residual_value = 0.0;
    std::int64_t oracle_iterations = 0;
    double chi_used = 0.0;
    bool chi_estimated = false;
    ConvergenceConstants constants;
    StepSizeBound step_bound;
    std::string topology;
    BoxConstraint box;
    std::vector<BenchmarkRun> runs;
};

// Full experiment: one reference equilibrium, then a seeker run per
// (step-size, seed) pair with the gap series against that reference.
inline BenchmarkReport run_benchmark(const GameSpec& game, const BenchmarkOptions& opts) {
    BenchmarkReport report;
    report.topology = opts.topology;
    report.box = game.box_at(0);

    const NashOracleResult oracle = nash_oracle(game, opts.tol, {}, opts.gamma0);
    report.x_star = oracle.x_star;
    report.vi_residual_value = oracle.residual;
    report.oracle_iterations = oracle.iterations;

    if (opts.chi) {
        report.chi_used = *opts.chi;
    } else {
        SplitMix64 rng(derive_stream_seed(opts.analysis_seed, 0xC41));
        report.chi_used = estimate_chi(game, opts.chi_samples, rng);
        report.chi_estimated = true;
    }
    const auto lipschitz = estimate_lipschitz_all(game, opts.lipschitz_samples, opts.analysis_seed);
    report.constants = build_constants(game, report.chi_used, lipschitz, opts.mu_ref);
    report.step_bound = max_step_size(report.constants);

    for (double alpha : opts.alphas) {
        for (std::uint64_t seed : opts.seeds) {
            AlgorithmParams params;
            params.alpha = alpha;
            params.mu = opts.mu;
            params.max_iters = opts.iters;
            params.seed = seed;
            params.record_every = opts.record_every;
            params.threads = opts.threads;

            BenchmarkRun run_result;
            run_result.alpha = alpha;
            run_result.seed = seed;
            run_result.admissible = alpha < report.step_bound.alpha_max;
            run_result.record = run(game, params, {}, &report.x_star);

            const auto& series = run_result.record.series;
            run_result.initial_gap = series.front().nash_gap.value();
            run_result.final_gap = series.back().nash_gap.value();
            const std::int64_t tail_from =
                opts.iters - opts.iters / 10;  // last 10% of the horizon
            double tail_sum = 0.0;
            std::int64_t tail_count = 0;
            for (const RunStep& s : series) {
                if (s.t >= tail_from) {
                    tail_sum += s.nash_gap.value();
                    ++tail_count;
                }
                if (run_result.half_gap_iteration < 0 &&
                    s.nash_gap.value() <= 0.5 * run_result.initial_gap) {
                    run_result.half_gap_iteration = s.t;
                }
            }
            run_result.steady_gap = tail_count > 0 ? tail_sum / tail_count : run_result.final_gap;
            report.runs.push_back(std::move(run_result));
        }
    }
    return report;
}

}  // namespace nashseek
