#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nashseek/errors.hpp"
#include "nashseek/graph.hpp"
#include "nashseek/rng.hpp"

namespace nashseek {

// Scalar action bounds; compact by construction.
struct BoxConstraint {
    double lower = 0.0;
    double upper = 0.0;

    bool valid() const {
        return std::isfinite(lower) && std::isfinite(upper) && lower <= upper;
    }
    bool contains(double v) const { return v >= lower && v <= upper; }
};

inline double project_box(double v, const BoxConstraint& box) {
    return std::min(std::max(v, box.lower), box.upper);
}

// Full action profile, one scalar per player, coalition blocks contiguous.
using ActionProfile = std::vector<double>;

// Black-box cost: full profile in, scalar out. Callers never see gradients;
// everything downstream works from function values only.
struct CostOracle {
    std::function<double(std::span<const double>)> evaluate;
    std::optional<double> declared_lipschitz;  // known Lipschitz bound, if any
};

// Exact partial subgradients of one player's cost with respect to its own
// coalition block (length n_i). Optional white-box companion used by the
// reference equilibrium solver, never by the seeker.
using CoalitionSubgradient = std::function<std::vector<double>(std::span<const double>)>;

struct PlayerSpec {
    int coalition = 0;  // 0-based
    int player = 0;     // 0-based within the coalition
    BoxConstraint box;
    CostOracle cost;
    CoalitionSubgradient subgradient;  // may be empty
};

// Assembled game: players grouped into coalitions, one mixing graph per
// coalition, a bijective (coalition, player) <-> global coordinate map.
// Immutable after assembly; safe to share across threads. The oracle call
// counter is atomic so concurrent evaluation stays well-defined.
class GameSpec {
public:
    int num_coalitions() const { return static_cast<int>(sizes_.size()); }
    int coalition_size(int i) const { return sizes_[static_cast<std::size_t>(i)]; }
    int dimension() const { return n_; }
    int coalition_offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }

    int coord(int i, int j) const {
        check_player(i, j);
        return offsets_[static_cast<std::size_t>(i)] + j;
    }

    const BoxConstraint& box(int i, int j) const { return players_[coord(i, j)].box; }
    const BoxConstraint& box_at(int global) const {
        return players_[static_cast<std::size_t>(global)].box;
    }
    const CoalitionGraph& graph(int i) const {
        check_coalition(i);
        return graphs_[static_cast<std::size_t>(i)];
    }

    double evaluate(int i, int j, std::span<const double> x) const {
        check_profile(x);
        const PlayerSpec& p = players_[coord(i, j)];
        if (!p.cost.evaluate) {
            throw ValidationError("cost oracle missing for coalition " + std::to_string(i + 1) +
                                  " player " + std::to_string(j + 1));
        }
        evals_->fetch_add(1, std::memory_order_relaxed);
        return p.cost.evaluate(x);
    }

    std::optional<double> declared_lipschitz(int i, int j) const {
        return players_[coord(i, j)].cost.declared_lipschitz;
    }

    bool has_subgradients() const {
        return std::all_of(players_.begin(), players_.end(),
                           [](const PlayerSpec& p) { return bool(p.subgradient); });
    }

    std::vector<double> subgradient(int i, int j, std::span<const double> x) const {
        check_profile(x);
        const PlayerSpec& p = players_[coord(i, j)];
        if (!p.subgradient) {
            throw ValidationError("no analytic subgradient attached for coalition " +
                                  std::to_string(i + 1) + " player " + std::to_string(j + 1));
        }
        auto g = p.subgradient(x);
        if (static_cast<int>(g.size()) != coalition_size(i)) {
            throw ValidationError("analytic subgradient returned wrong length");
        }
        return g;
    }

    bool feasible(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != n_) return false;
        for (int g = 0; g < n_; ++g) {
            if (!players_[static_cast<std::size_t>(g)].box.contains(x[static_cast<std::size_t>(g)]))
                return false;
        }
        return true;
    }

    ActionProfile sample_feasible(SplitMix64& rng) const {
        ActionProfile x(static_cast<std::size_t>(n_));
        for (int g = 0; g < n_; ++g) {
            const BoxConstraint& b = players_[static_cast<std::size_t>(g)].box;
            x[static_cast<std::size_t>(g)] = b.lower + rng.next_unit() * (b.upper - b.lower);
        }
        return x;
    }

    ActionProfile project(std::span<const double> v) const {
        check_profile(v);
        ActionProfile out(v.begin(), v.end());
        for (int g = 0; g < n_; ++g) {
            out[static_cast<std::size_t>(g)] =
                project_box(out[static_cast<std::size_t>(g)], players_[static_cast<std::size_t>(g)].box);
        }
        return out;
    }

    std::uint64_t oracle_evaluations() const { return evals_->load(std::memory_order_relaxed); }
    void reset_oracle_count() const { evals_->store(0, std::memory_order_relaxed); }

    void check_profile(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != n_) {
            throw ValidationError("action profile has length " + std::to_string(x.size()) +
                                  ", expected " + std::to_string(n_));
        }
    }

private:
    friend GameSpec assemble_game(std::vector<PlayerSpec> players,
                                  std::vector<CoalitionGraph> graphs);

    void check_coalition(int i) const {
        if (i < 0 || i >= num_coalitions()) {
            throw ValidationError("coalition index " + std::to_string(i) + " out of range");
        }
    }
    void check_player(int i, int j) const {
        check_coalition(i);
        if (j < 0 || j >= sizes_[static_cast<std::size_t>(i)]) {
            throw ValidationError("player index " + std::to_string(j) +
                                  " out of range in coalition " + std::to_string(i));
        }
    }

    std::vector<int> sizes_;
    std::vector<int> offsets_;
    std::vector<PlayerSpec> players_;  // flattened; index == global coordinate
    std::vector<CoalitionGraph> graphs_;
    int n_ = 0;
    std::shared_ptr<std::atomic<std::uint64_t>> evals_;
};

inline GameSpec assemble_game(std::vector<PlayerSpec> players,
                              std::vector<CoalitionGraph> graphs) {
    if (players.empty()) throw ValidationError("assemble_game: no players");
    int num_coalitions = 0;
    for (const PlayerSpec& p : players) {
        if (p.coalition < 0) throw ValidationError("assemble_game: negative coalition index");
        num_coalitions = std::max(num_coalitions, p.coalition + 1);
    }

    std::vector<std::vector<const PlayerSpec*>> grouped(static_cast<std::size_t>(num_coalitions));
    for (const PlayerSpec& p : players) grouped[static_cast<std::size_t>(p.coalition)].push_back(&p);

    GameSpec game;
    game.sizes_.resize(static_cast<std::size_t>(num_coalitions));
    game.offsets_.resize(static_cast<std::size_t>(num_coalitions));
    int offset = 0;
    for (int i = 0; i < num_coalitions; ++i) {
        auto& members = grouped[static_cast<std::size_t>(i)];
        if (members.empty()) {
            throw ValidationError("assemble_game: coalition " + std::to_string(i + 1) +
                                  " is empty");
        }
        const int n_i = static_cast<int>(members.size());
        std::vector<const PlayerSpec*> slots(static_cast<std::size_t>(n_i), nullptr);
        for (const PlayerSpec* p : members) {
            if (p->player < 0 || p->player >= n_i) {
                throw ValidationError("assemble_game: player index " +
                                      std::to_string(p->player + 1) + " out of range in coalition " +
                                      std::to_string(i + 1));
            }
            if (slots[static_cast<std::size_t>(p->player)] != nullptr) {
                throw ValidationError("assemble_game: duplicate player " +
                                      std::to_string(p->player + 1) + " in coalition " +
                                      std::to_string(i + 1));
            }
            slots[static_cast<std::size_t>(p->player)] = p;
        }
        for (const PlayerSpec* p : slots) {
            if (!p->box.valid()) {
                throw ValidationError("assemble_game: invalid box for coalition " +
                                      std::to_string(i + 1) + " player " +
                                      std::to_string(p->player + 1));
            }
            game.players_.push_back(*p);
        }
        game.sizes_[static_cast<std::size_t>(i)] = n_i;
        game.offsets_[static_cast<std::size_t>(i)] = offset;
        offset += n_i;
    }
    game.n_ = offset;

    if (static_cast<int>(graphs.size()) != num_coalitions) {
        throw ValidationError("assemble_game: " + std::to_string(graphs.size()) +
                              " graphs for " + std::to_string(num_coalitions) + " coalitions");
    }
    for (int i = 0; i < num_coalitions; ++i) {
        if (graphs[static_cast<std::size_t>(i)].size() != game.sizes_[static_cast<std::size_t>(i)]) {
            throw ValidationError(
                "assemble_game: graph size " +
                std::to_string(graphs[static_cast<std::size_t>(i)].size()) +
                " != player count " + std::to_string(game.sizes_[static_cast<std::size_t>(i)]) +
                " for coalition " + std::to_string(i + 1));
        }
    }
    game.graphs_ = std::move(graphs);
    game.evals_ = std::make_shared<std::atomic<std::uint64_t>>(0);
    return game;
}

// Coalition cost: the average of the members' local costs.
inline double coalition_cost(const GameSpec& game, int i, std::span<const double> x) {
    const int n_i = game.coalition_size(i);
    double sum = 0.0;
    for (int j = 0; j < n_i; ++j) sum += game.evaluate(i, j, x);
    return sum / n_i;
}

}  // namespace nashseek
