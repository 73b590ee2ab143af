#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nashseek/game.hpp"
#include "nashseek/graph.hpp"

using namespace nashseek;

namespace {

PlayerSpec constant_player(int coalition, int player, double value,
                           BoxConstraint box = {0.0, 1.0}) {
    PlayerSpec p;
    p.coalition = coalition;
    p.player = player;
    p.box = box;
    p.cost.evaluate = [value](std::span<const double>) { return value; };
    return p;
}

}  // namespace

TEST_CASE("project_box clamps and is idempotent") {
    const BoxConstraint box{0.0, 3.0};
    REQUIRE(project_box(5.0, box) == 3.0);
    REQUIRE(project_box(1.5, box) == 1.5);
    REQUIRE(project_box(-2.0, box) == 0.0);
    for (double v : {-10.0, -0.1, 0.0, 1.7, 3.0, 42.0}) {
        REQUIRE(project_box(project_box(v, box), box) == project_box(v, box));
    }
}

TEST_CASE("projection is non-expansive") {
    const BoxConstraint box{-1.5, 2.25};
    SplitMix64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.next_unit() * 20.0 - 10.0;
        const double b = rng.next_unit() * 20.0 - 10.0;
        REQUIRE(std::abs(project_box(a, box) - project_box(b, box)) <= std::abs(a - b) + 1e-15);
    }
}

TEST_CASE("assemble_game lays out 4x6 coalitions") {
    std::vector<PlayerSpec> players;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) players.push_back(constant_player(i, j, 1.0));
    std::vector<CoalitionGraph> graphs(4, build_ring(6, 0.5));
    const GameSpec game = assemble_game(players, graphs);
    REQUIRE(game.dimension() == 24);
    REQUIRE(game.num_coalitions() == 4);
    for (int i = 0; i < 4; ++i) {
        REQUIRE(game.coalition_size(i) == 6);
        for (int j = 0; j < 6; ++j) REQUIRE(game.coord(i, j) == i * 6 + j);
    }
}

TEST_CASE("a single self-looped player is a valid game") {
    const GameSpec game = assemble_game({constant_player(0, 0, 2.0)}, {build_ring(1, 0.5)});
    REQUIRE(game.dimension() == 1);
    const std::vector<double> x{0.5};
    REQUIRE(coalition_cost(game, 0, x) == 2.0);
}

TEST_CASE("assembly failures name the offence") {
    // graph size mismatch
    {
        std::vector<PlayerSpec> players{constant_player(0, 0, 1.0), constant_player(0, 1, 1.0)};
        REQUIRE_THROWS_WITH(assemble_game(players, {build_ring(3, 0.5)}),
                            Catch::Matchers::ContainsSubstring("graph size 3") &&
                                Catch::Matchers::ContainsSubstring("player count 2"));
    }
    // duplicate player
    {
        std::vector<PlayerSpec> players{constant_player(0, 0, 1.0), constant_player(0, 0, 1.0)};
        REQUIRE_THROWS_WITH(assemble_game(players, {build_ring(2, 0.5)}),
                            Catch::Matchers::ContainsSubstring("duplicate player"));
    }
    // empty coalition (index 1 missing between 0 and 2)
    {
        std::vector<PlayerSpec> players{constant_player(0, 0, 1.0), constant_player(2, 0, 1.0)};
        std::vector<CoalitionGraph> graphs(3, build_ring(1, 0.5));
        REQUIRE_THROWS_WITH(assemble_game(players, graphs),
                            Catch::Matchers::ContainsSubstring("empty"));
    }
    // invalid box
    {
        PlayerSpec bad = constant_player(0, 0, 1.0, BoxConstraint{2.0, 1.0});
        REQUIRE_THROWS_AS(assemble_game({bad}, {build_ring(1, 0.5)}), ValidationError);
    }
    // no players at all
    REQUIRE_THROWS_AS(assemble_game({}, {}), ValidationError);
}

TEST_CASE("coalition_cost averages member costs") {
    std::vector<PlayerSpec> players{constant_player(0, 0, 4.0), constant_player(0, 1, 6.0)};
    const GameSpec game = assemble_game(players, {build_ring(2, 0.5)});
    const std::vector<double> x{0.0, 0.0};
    REQUIRE(coalition_cost(game, 0, x) == 5.0);
}

TEST_CASE("coalition_cost ignores the order players were listed in") {
    auto member = [](int j, double scale) {
        PlayerSpec p;
        p.coalition = 0;
        p.player = j;
        p.box = {0.0, 1.0};
        p.cost.evaluate = [scale](std::span<const double> x) { return scale * x[0] + scale; };
        return p;
    };
    std::vector<PlayerSpec> forward{member(0, 1.0), member(1, 2.0), member(2, 3.0)};
    std::vector<PlayerSpec> shuffled{member(2, 3.0), member(0, 1.0), member(1, 2.0)};
    const GameSpec a = assemble_game(forward, {build_ring(3, 0.5)});
    const GameSpec b = assemble_game(shuffled, {build_ring(3, 0.5)});
    const std::vector<double> x{0.25, 0.5, 0.75};
    REQUIRE(coalition_cost(a, 0, x) == coalition_cost(b, 0, x));
}

TEST_CASE("oracle evaluations are counted") {
    std::vector<PlayerSpec> players{constant_player(0, 0, 4.0), constant_player(0, 1, 6.0)};
    const GameSpec game = assemble_game(players, {build_ring(2, 0.5)});
    game.reset_oracle_count();
    const std::vector<double> x{0.0, 0.0};
    coalition_cost(game, 0, x);
    REQUIRE(game.oracle_evaluations() == 2);
    game.evaluate(0, 0, x);
    REQUIRE(game.oracle_evaluations() == 3);
}

TEST_CASE("profile length is validated") {
    const GameSpec game = assemble_game({constant_player(0, 0, 1.0)}, {build_ring(1, 0.5)});
    const std::vector<double> wrong{1.0, 2.0};
    REQUIRE_THROWS_AS(game.evaluate(0, 0, wrong), ValidationError);
}

TEST_CASE("sample_feasible respects the boxes") {
    std::vector<PlayerSpec> players{constant_player(0, 0, 0.0, {-2.0, -1.0}),
                                    constant_player(0, 1, 0.0, {5.0, 5.0})};
    const GameSpec game = assemble_game(players, {build_ring(2, 0.5)});
    SplitMix64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const ActionProfile x = game.sample_feasible(rng);
        REQUIRE(game.feasible(x));
        REQUIRE(x[1] == 5.0);  // degenerate box pins the coordinate
    }
}
