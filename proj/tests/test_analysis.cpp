#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nashseek/analysis.hpp"
#include "nashseek/game.hpp"
#include "nashseek/graph.hpp"

using namespace nashseek;

namespace {

GameSpec single_player(std::function<double(std::span<const double>)> cost,
                       CoalitionSubgradient grad, BoxConstraint box) {
    PlayerSpec p;
    p.coalition = 0;
    p.player = 0;
    p.box = box;
    p.cost.evaluate = std::move(cost);
    p.subgradient = std::move(grad);
    return assemble_game({p}, {build_ring(1, 0.5)});
}

GameSpec quadratic_coalition(std::vector<double> weights, std::vector<double> centers,
                             BoxConstraint box) {
    const int n = static_cast<int>(weights.size());
    std::vector<PlayerSpec> players;
    for (int j = 0; j < n; ++j) {
        PlayerSpec p;
        p.coalition = 0;
        p.player = j;
        p.box = box;
        const double w = weights[static_cast<std::size_t>(j)];
        const double c = centers[static_cast<std::size_t>(j)];
        p.cost.evaluate = [w, c, j](std::span<const double> x) {
            const double d = x[static_cast<std::size_t>(j)] - c;
            return w * d * d;
        };
        p.subgradient = [w, c, j, n](std::span<const double> x) {
            std::vector<double> g(static_cast<std::size_t>(n), 0.0);
            g[static_cast<std::size_t>(j)] = 2.0 * w * (x[static_cast<std::size_t>(j)] - c);
            return g;
        };
        players.push_back(std::move(p));
    }
    return assemble_game(players, {n == 1 ? build_ring(1, 0.5) : build_ring(n, 0.5)});
}

}  // namespace

TEST_CASE("estimate_lipschitz brackets a linear slope") {
    const std::vector<BoxConstraint> boxes(3, BoxConstraint{0.0, 1.0});
    SplitMix64 rng(1);
    const double d = estimate_lipschitz(
        [](std::span<const double> x) { return 3.0 * x[0]; }, boxes, 4000, rng);
    REQUIRE(d >= 3.0 * 0.99);  // sampled max approaches 3 from below, x1.2 inflation
    REQUIRE(d <= 3.6);

    SplitMix64 rng2(2);
    const double zero = estimate_lipschitz(
        [](std::span<const double>) { return 5.0; }, boxes, 100, rng2);
    REQUIRE(zero == 0.0);
}

TEST_CASE("sampled costs obey the estimated Lipschitz bound") {
    const GameSpec game = quadratic_coalition({1.0, 2.0}, {0.0, 0.5}, {-1.0, 1.0});
    const auto d = estimate_lipschitz_all(game, 3000, 123);
    SplitMix64 rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const auto x = game.sample_feasible(rng);
        const auto y = game.sample_feasible(rng);
        double dist = 0.0;
        for (std::size_t g = 0; g < x.size(); ++g) dist += (x[g] - y[g]) * (x[g] - y[g]);
        dist = std::sqrt(dist);
        if (dist < 1e-9) continue;
        for (int j = 0; j < 2; ++j) {
            const double diff = std::abs(game.evaluate(0, j, x) - game.evaluate(0, j, y));
            REQUIRE(diff <= d[static_cast<std::size_t>(j)] * dist * (1.0 + 1e-9));
        }
    }
}

// One player, D = 1, mu_ref = 1, sigma = 0 would need a complete graph; the
// 1-node ring has sigma = 0 as well. Closed forms: L = 1, B = sqrt(5),
// varsigma = 1, k4 = 12, k5 = 1/2, k6 = 6*5*5 + 2*5 = 160, k7 = 12*5*5 = 300.
TEST_CASE("build_constants reproduces the closed forms") {
    const GameSpec game = single_player([](std::span<const double> x) { return x[0]; },
                                        [](std::span<const double>) {
                                            return std::vector<double>{1.0};
                                        },
                                        {-1.0, 1.0});
    const ConvergenceConstants c = build_constants(game, 1.0, {1.0}, 1.0);
    REQUIRE(c.k1 == 1.0);
    REQUIRE(c.k2 == 1.0);
    REQUIRE(c.k3 == 6.0);
    REQUIRE_THAT(c.smoothed_grad_lipschitz, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(c.oracle_moment_bound, Catch::Matchers::WithinAbs(std::sqrt(5.0), 1e-12));
    REQUIRE_THAT(c.varsigma, Catch::Matchers::WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(c.sigma_bar, Catch::Matchers::WithinAbs(0.0, 1e-9));
    REQUIRE_THAT(c.k4, Catch::Matchers::WithinAbs(12.0, 1e-9));
    REQUIRE_THAT(c.k5, Catch::Matchers::WithinAbs(0.5, 1e-9));
    REQUIRE_THAT(c.k6, Catch::Matchers::WithinAbs(160.0, 1e-9));
    REQUIRE_THAT(c.k7, Catch::Matchers::WithinAbs(300.0, 1e-9));
}

TEST_CASE("degenerate Lipschitz bounds zero out the noise constants") {
    const GameSpec game = quadratic_coalition({1.0, 1.0}, {0.0, 0.0}, {-1.0, 1.0});
    const ConvergenceConstants c = build_constants(game, 2.0, {0.0, 0.0}, 0.5);
    REQUIRE(c.smoothed_grad_lipschitz == 0.0);
    REQUIRE(c.oracle_moment_bound == 0.0);
    REQUIRE(c.k4 == 0.0);
    REQUIRE(c.k6 == 0.0);
    REQUIRE(c.k7 == 0.0);
}

TEST_CASE("constants grow monotonically in the Lipschitz bounds") {
    const GameSpec game = quadratic_coalition({1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, {-1.0, 1.0});
    SplitMix64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> d{rng.next_unit(), rng.next_unit(), rng.next_unit()};
        std::vector<double> d_up = d;
        const int bump = static_cast<int>(rng.next_unit() * 3.0);
        d_up[static_cast<std::size_t>(bump)] += rng.next_unit();
        const ConvergenceConstants a = build_constants(game, 1.0, d, 0.1);
        const ConvergenceConstants b = build_constants(game, 1.0, d_up, 0.1);
        REQUIRE(b.smoothed_grad_lipschitz >= a.smoothed_grad_lipschitz);
        REQUIRE(b.oracle_moment_bound >= a.oracle_moment_bound);
        REQUIRE(b.k4 >= a.k4);
        REQUIRE(b.k6 >= a.k6);
        REQUIRE(b.k7 >= a.k7);
    }
}

TEST_CASE("build_constants validates its inputs") {
    const GameSpec game = quadratic_coalition({1.0}, {0.0}, {-1.0, 1.0});
    REQUIRE_THROWS_AS(build_constants(game, 0.0, {1.0}, 0.1), ValidationError);
    REQUIRE_THROWS_AS(build_constants(game, 1.0, {1.0}, 0.0), ValidationError);
    REQUIRE_THROWS_AS(build_constants(game, 1.0, {1.0, 1.0}, 0.1), ValidationError);
    REQUIRE_THROWS_AS(build_constants(game, 1.0, {-1.0}, 0.1), ValidationError);
}

TEST_CASE("max_step_size takes the binding branch") {
    ConvergenceConstants c;
    c.k1 = 1.0;
    c.k4 = 12.0;
    c.k5 = 0.5;
    REQUIRE_THAT(max_step_size(c).alpha_max, Catch::Matchers::WithinAbs(0.2041, 1e-4));

    c.k1 = 10.0;
    c.k4 = 0.01;
    c.k5 = 0.5;
    REQUIRE_THAT(max_step_size(c).alpha_max, Catch::Matchers::WithinAbs(0.1, 1e-12));

    c.k1 = 2.0;
    c.k4 = 0.0;
    const StepSizeBound fallback = max_step_size(c);
    REQUIRE(fallback.k4_zero_fallback);
    REQUIRE(fallback.alpha_max == 0.5);

    // k5 -> 0 (sigma_bar -> 1) pushes the admissible range to zero
    c.k1 = 1.0;
    c.k4 = 12.0;
    c.k5 = 1e-12;
    REQUIRE(max_step_size(c).alpha_max < 1e-6);
}

TEST_CASE("spectral radius of the error recursion matrix") {
    ConvergenceConstants c;
    c.k1 = 1.0;
    c.k4 = 1.0;
    c.k5 = 0.375;
    REQUIRE_THAT(spectral_radius_M(0.1, c), Catch::Matchers::WithinAbs(0.9, 1e-12));

    c.k1 = 2.0;
    c.k4 = 50.0;
    c.k5 = 0.3;
    const double alpha_max = max_step_size(c).alpha_max;
    for (int g = 1; g <= 100; ++g) {
        const double alpha = alpha_max * g / 101.0;
        REQUIRE(spectral_radius_M(alpha, c) < 1.0);
    }
    const double outside = 2.0 / c.k1;
    if (c.k4 * outside * outside >= c.k5) {
        REQUIRE(spectral_radius_M(outside, c) >= 1.0);
    }
}

TEST_CASE("steady-state bounds reduce and scale as expected") {
    ConvergenceConstants c;
    c.k1 = 1.0;
    c.k2 = 1.0;
    c.k3 = 6.0;
    c.k4 = 12.0;
    c.k5 = 0.5;
    c.k6 = 160.0;
    c.k7 = 0.0;
    // decoupled system: x_bound = k6 * alpha / k1 exactly
    const BoundReport decoupled = steady_state_bounds(0.01, c);
    REQUIRE_THAT(decoupled.x_bound, Catch::Matchers::WithinRel(160.0 * 0.01, 1e-12));

    c.k7 = 300.0;
    const double a = max_step_size(c).alpha_max / 10.0;
    const BoundReport r1 = steady_state_bounds(a, c);
    const BoundReport r2 = steady_state_bounds(a / 2.0, c);
    const BoundReport r4 = steady_state_bounds(a / 4.0, c);
    // halving alpha roughly halves the x bound in the small-alpha regime
    REQUIRE(r2.x_bound / r1.x_bound > 0.4);
    REQUIRE(r2.x_bound / r1.x_bound < 0.6);
    // phi_bound / alpha^2 is stable
    const double q1 = r1.phi_bound / (a * a);
    const double q2 = r2.phi_bound / (a * a / 4.0);
    const double q4 = r4.phi_bound / (a * a / 16.0);
    REQUIRE(std::max({q1, q2, q4}) / std::min({q1, q2, q4}) < 1.05);

    REQUIRE_THROWS_AS(steady_state_bounds(max_step_size(c).alpha_max * 1.01, c), ValidationError);
    REQUIRE_THROWS_AS(steady_state_bounds(0.0, c), ValidationError);
}

TEST_CASE("nash_gap is the Euclidean distance") {
    const std::vector<double> x{1.0, 2.0, 3.0};
    REQUIRE(nash_gap(x, x) == 0.0);
    const std::vector<double> y{4.0, 6.0, 3.0};
    REQUIRE(nash_gap(x, y) == 5.0);
    const std::vector<double> bad{1.0};
    REQUIRE_THROWS_AS(nash_gap(x, bad), ValidationError);
}

TEST_CASE("reference solver finds scalar minima") {
    // interior minimum
    const GameSpec interior = single_player(
        [](std::span<const double> x) { return x[0] * x[0]; },
        [](std::span<const double> x) { return std::vector<double>{2.0 * x[0]}; },
        {-1.0, 1.0});
    const NashOracleResult a = nash_oracle(interior, 1e-9);
    REQUIRE(std::abs(a.x_star[0]) <= 1e-8);
    REQUIRE(a.residual <= 1e-8);

    // projection-active minimum of (x-5)^2 on [0, 3]
    const GameSpec clipped = single_player(
        [](std::span<const double> x) { return (x[0] - 5.0) * (x[0] - 5.0); },
        [](std::span<const double> x) { return std::vector<double>{2.0 * (x[0] - 5.0)}; },
        {0.0, 3.0});
    const NashOracleResult b = nash_oracle(clipped, 1e-9);
    REQUIRE_THAT(b.x_star[0], Catch::Matchers::WithinAbs(3.0, 1e-8));
}

TEST_CASE("reference solver requires analytic subgradients") {
    PlayerSpec p;
    p.coalition = 0;
    p.player = 0;
    p.box = {0.0, 1.0};
    p.cost.evaluate = [](std::span<const double> x) { return x[0]; };
    const GameSpec game = assemble_game({p}, {build_ring(1, 0.5)});
    REQUIRE_THROWS_AS(nash_oracle(game, 1e-8), ValidationError);
}

TEST_CASE("separable quadratic games solve to their clamped centers") {
    const GameSpec game = quadratic_coalition({1.0, 2.0, 1.5}, {0.25, -0.5, 3.0}, {-1.0, 1.0});
    const NashOracleResult r = nash_oracle(game, 1e-9);
    REQUIRE_THAT(r.x_star[0], Catch::Matchers::WithinAbs(0.25, 1e-7));
    REQUIRE_THAT(r.x_star[1], Catch::Matchers::WithinAbs(-0.5, 1e-7));
    REQUIRE_THAT(r.x_star[2], Catch::Matchers::WithinAbs(1.0, 1e-7));  // clamped
    REQUIRE(vi_residual(game, r.x_star) <= 1e-8);
}

TEST_CASE("chi estimate matches the separable closed form") {
    // F0 coordinate k is (2 w_k / n) (x_k - c_k): the game mapping's Jacobian
    // is diagonal with entries 2 w_k / n.
    const GameSpec game = quadratic_coalition({1.0, 1.0}, {0.0, 0.0}, {-1.0, 1.0});
    SplitMix64 rng(6);
    const double chi = estimate_chi(game, 500, rng);
    REQUIRE_THAT(chi, Catch::Matchers::WithinAbs(1.0, 1e-9));  // 2*1/2 exactly

    const GameSpec mixed = quadratic_coalition({1.0, 3.0}, {0.0, 0.0}, {-1.0, 1.0});
    SplitMix64 rng2(7);
    const double chi_mixed = estimate_chi(mixed, 2000, rng2);
    REQUIRE(chi_mixed >= 1.0 - 1e-9);  // min eigenvalue
    REQUIRE(chi_mixed <= 3.0 + 1e-9);  // max eigenvalue
}

TEST_CASE("best-response sweep is stationary at the solution") {
    const GameSpec game = quadratic_coalition({1.0, 2.0}, {0.3, -0.4}, {-1.0, 1.0});
    const NashOracleResult r = nash_oracle(game, 1e-9);
    const SweepResult sweep = best_response_sweep(game, r.x_star);
    REQUIRE(sweep.max_move <= 1e-6);
}
