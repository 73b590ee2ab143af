#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "nashseek/errors.hpp"
#include "nashseek/game.hpp"
#include "nashseek/matrix.hpp"
#include "nashseek/record.hpp"
#include "nashseek/rng.hpp"
#include "nashseek/smoothing.hpp"
#include "nashseek/version.hpp"

namespace nashseek {

struct AlgorithmParams {
    double alpha = 0.1;             // constant step-size
    SmoothingSchedule mu;
    std::int64_t max_iters = 1000;  // 0 is allowed: record the initial state only
    std::uint64_t seed = 0;
    std::int64_t record_every = 1;
    std::optional<double> stop_tol;  // on ||x_{t+1} - x_t|| / alpha
    int threads = 1;
    double conservation_tol = 1e-9;

    void validate() const {
        if (!(alpha > 0.0)) throw ValidationError("alpha must be > 0");
        if (max_iters < 0) throw ValidationError("max_iters must be >= 0");
        if (record_every < 1) throw ValidationError("record_every must be >= 1");
        if (threads < 1) throw ValidationError("threads must be >= 1");
        if (!mu.valid()) throw ValidationError("smoothing schedule invalid (mu0 must be > 0)");
        if (stop_tol && !(*stop_tol > 0.0)) throw ValidationError("stop_tol must be > 0");
    }
};

// Gradient trackers: one n_i x n_i block per coalition, row j = player,
// column k = tracked coordinate.
struct TrackerState {
    std::vector<Matrix> phi;
};

struct SeekerState {
    std::int64_t t = 0;
    ActionProfile x;
    TrackerState trackers;
    std::vector<OracleSample> cached_pi;   // pi(x_t), one per global player index
    std::vector<NormalStream> streams;     // one per global player index
    double conservation_residual = 0.0;    // max_{i,k} at current t
};

namespace detail {

inline void run_partitioned(int count, int threads, const std::function<void(int, int)>& body) {
    if (threads <= 1 || count <= 1) {
        body(0, count);
        return;
    }
    const int team = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(team));
    const int chunk = (count + team - 1) / team;
    for (int tid = 0; tid < team; ++tid) {
        const int begin = tid * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(body, begin, end);
    }
    for (auto& th : pool) th.join();
}

// max_{i,k} | mean_j phi^i_{jk} - mean_j pi^i_{jk}(x_t) |. The identity holds
// exactly under column-stochastic mixing; in floating point only rounding
// accumulates, so a tight tolerance is a real invariant check.
inline double conservation_residual(const GameSpec& game, const TrackerState& trackers,
                                    const std::vector<OracleSample>& cached_pi) {
    double worst = 0.0;
    for (int i = 0; i < game.num_coalitions(); ++i) {
        const int n_i = game.coalition_size(i);
        const int off = game.coalition_offset(i);
        const Matrix& phi = trackers.phi[static_cast<std::size_t>(i)];
        for (int k = 0; k < n_i; ++k) {
            double phi_sum = 0.0, pi_sum = 0.0;
            for (int j = 0; j < n_i; ++j) {
                phi_sum += phi.at(j, k);
                pi_sum += cached_pi[static_cast<std::size_t>(off + j)].values[static_cast<std::size_t>(k)];
            }
            worst = std::max(worst, std::abs(phi_sum - pi_sum) / n_i);
        }
    }
    return worst;
}

inline void check_finite(const SeekerState& state) {
    for (std::size_t g = 0; g < state.x.size(); ++g) {
        if (!std::isfinite(state.x[g])) {
            throw NumericalError("non-finite action x[" + std::to_string(g) + "] = " +
                                 std::to_string(state.x[g]) + " at t=" + std::to_string(state.t));
        }
    }
    for (std::size_t i = 0; i < state.trackers.phi.size(); ++i) {
        const Matrix& phi = state.trackers.phi[i];
        for (std::size_t e = 0; e < phi.data.size(); ++e) {
            if (!std::isfinite(phi.data[e])) {
                throw NumericalError("non-finite gradient tracker in coalition " +
                                     std::to_string(i + 1) + " (entry " + std::to_string(e) +
                                     " = " + std::to_string(phi.data[e]) + ") at t=" +
                                     std::to_string(state.t));
            }
        }
    }
}

}  // namespace detail

// Sum over coalitions and coordinates of ||phi^i_k - 1*phibar^i_k||^2.
inline double tracking_error(const GameSpec& game, const TrackerState& trackers,
                             std::vector<double>* per_coalition = nullptr) {
    double total = 0.0;
    if (per_coalition) per_coalition->assign(static_cast<std::size_t>(game.num_coalitions()), 0.0);
    for (int i = 0; i < game.num_coalitions(); ++i) {
        const int n_i = game.coalition_size(i);
        const Matrix& phi = trackers.phi[static_cast<std::size_t>(i)];
        double coalition_total = 0.0;
        for (int k = 0; k < n_i; ++k) {
            double mean = 0.0;
            for (int j = 0; j < n_i; ++j) mean += phi.at(j, k);
            mean /= n_i;
            for (int j = 0; j < n_i; ++j) {
                const double d = phi.at(j, k) - mean;
                coalition_total += d * d;
            }
        }
        total += coalition_total;
        if (per_coalition) (*per_coalition)[static_cast<std::size_t>(i)] = coalition_total;
    }
    return total;
}

// Initial state: x_0 feasible (given or sampled uniformly from the boxes),
// trackers seeded with the oracle at x_0.
inline SeekerState init(const GameSpec& game, const AlgorithmParams& params,
                        const std::optional<ActionProfile>& x0 = {}) {
    params.validate();
    const int n = game.dimension();

    SeekerState state;
    state.t = 0;
    if (x0) {
        game.check_profile(*x0);
        if (!game.feasible(*x0)) {
            throw ValidationError("x0 lies outside the action boxes");
        }
        state.x = *x0;
    } else {
        // Stream index n is reserved for initialization; players use 0..n-1.
        SplitMix64 init_stream(derive_stream_seed(params.seed, static_cast<std::uint64_t>(n)));
        state.x = game.sample_feasible(init_stream);
    }

    state.streams.reserve(static_cast<std::size_t>(n));
    for (int g = 0; g < n; ++g) {
        state.streams.emplace_back(derive_stream_seed(params.seed, static_cast<std::uint64_t>(g)));
    }

    state.trackers.phi.reserve(static_cast<std::size_t>(game.num_coalitions()));
    for (int i = 0; i < game.num_coalitions(); ++i) {
        const int n_i = game.coalition_size(i);
        state.trackers.phi.emplace_back(n_i, n_i);
    }
    state.cached_pi.resize(static_cast<std::size_t>(n));

    for (int i = 0; i < game.num_coalitions(); ++i) {
        const int n_i = game.coalition_size(i);
        const int off = game.coalition_offset(i);
        Matrix& phi = state.trackers.phi[static_cast<std::size_t>(i)];
        for (int j = 0; j < n_i; ++j) {
            NormalStream& stream = state.streams[static_cast<std::size_t>(off + j)];
            const auto xi = draw_direction(stream, n_i);
            OracleSample s = oracle_pi(game, i, j, state.x, params.mu.value(0, j), xi);
            for (int k = 0; k < n_i; ++k) phi.at(j, k) = s.values[static_cast<std::size_t>(k)];
            state.cached_pi[static_cast<std::size_t>(off + j)] = std::move(s);
        }
    }
    detail::check_finite(state);
    state.conservation_residual = detail::conservation_residual(game, state.trackers, state.cached_pi);
    return state;
}

// One synchronous round:
//   (a) every player projects x - alpha * phi_jj along its own coordinate,
//   (b) every player draws a fresh direction and evaluates the oracle at the
//       new profile,
//   (c) trackers mix through the coalition matrix and add the oracle
//       difference pi(x_{t+1}) - pi(x_t), with pi(x_t) taken from the cache
//       (the same realization, not a re-draw).
// All players consume the time-t snapshot only, so per-player work is
// independent and the result does not depend on update order or the number
// of worker threads.
inline void step(SeekerState& state, const GameSpec& game, const AlgorithmParams& params) {
    const int n = game.dimension();
    const int num_coalitions = game.num_coalitions();

    ActionProfile x_next(static_cast<std::size_t>(n));
    for (int i = 0; i < num_coalitions; ++i) {
        const int n_i = game.coalition_size(i);
        const int off = game.coalition_offset(i);
        const Matrix& phi = state.trackers.phi[static_cast<std::size_t>(i)];
        for (int j = 0; j < n_i; ++j) {
            const int g = off + j;
            x_next[static_cast<std::size_t>(g)] = project_box(
                state.x[static_cast<std::size_t>(g)] - params.alpha * phi.at(j, j), game.box_at(g));
        }
    }

    std::vector<OracleSample> pi_next(static_cast<std::size_t>(n));
    TrackerState trackers_next;
    trackers_next.phi.reserve(static_cast<std::size_t>(num_coalitions));
    for (int i = 0; i < num_coalitions; ++i) {
        const int n_i = game.coalition_size(i);
        trackers_next.phi.emplace_back(n_i, n_i);
    }

    const std::int64_t t_next = state.t + 1;
    auto player_round = [&](int begin, int end) {
        for (int g = begin; g < end; ++g) {
            int i = 0;
            while (game.coalition_offset(i) + game.coalition_size(i) <= g) ++i;
            const int j = g - game.coalition_offset(i);
            const int n_i = game.coalition_size(i);
            const int off = game.coalition_offset(i);

            NormalStream& stream = state.streams[static_cast<std::size_t>(g)];
            const auto xi = draw_direction(stream, n_i);
            OracleSample fresh =
                oracle_pi(game, i, j, x_next, params.mu.value(t_next, j), xi);

            const Matrix& a = game.graph(i).weights;
            const Matrix& phi_old = state.trackers.phi[static_cast<std::size_t>(i)];
            Matrix& phi_new = trackers_next.phi[static_cast<std::size_t>(i)];
            const OracleSample& cached = state.cached_pi[static_cast<std::size_t>(off + j)];
            for (int k = 0; k < n_i; ++k) {
                double mixed = 0.0;
                for (int l = 0; l < n_i; ++l) mixed += a.at(j, l) * phi_old.at(l, k);
                phi_new.at(j, k) = mixed + fresh.values[static_cast<std::size_t>(k)] -
                                   cached.values[static_cast<std::size_t>(k)];
            }
            pi_next[static_cast<std::size_t>(g)] = std::move(fresh);
        }
    };
    detail::run_partitioned(n, params.threads, player_round);

    state.x = std::move(x_next);
    state.trackers = std::move(trackers_next);
    state.cached_pi = std::move(pi_next);
    state.t = t_next;

    detail::check_finite(state);
    state.conservation_residual =
        detail::conservation_residual(game, state.trackers, state.cached_pi);
    if (!(state.conservation_residual <= params.conservation_tol)) {
        throw NumericalError("gradient tracker conservation violated at t=" +
                             std::to_string(state.t) + ": residual " +
                             std::to_string(state.conservation_residual));
    }
}

namespace detail {

inline RunStep snapshot(const GameSpec& game, const SeekerState& state,
                        const AlgorithmParams& params, const std::vector<double>* x_star) {
    RunStep step;
    step.t = state.t;
    step.x = state.x;
    step.tracking_error = tracking_error(game, state.trackers, &step.coalition_consensus);
    step.conservation_residual = state.conservation_residual;
    step.mu = params.mu.value(state.t, 0);
    if (x_star) {
        double sq = 0.0;
        for (std::size_t g = 0; g < state.x.size(); ++g) {
            const double d = state.x[g] - (*x_star)[g];
            sq += d * d;
        }
        step.nash_gap = std::sqrt(sq);
    }
    return step;
}

}  // namespace detail

// Full run: iterates step() for max_iters rounds (or until the scaled step
// norm falls below stop_tol) and records trajectories every record_every
// rounds, always including t=0 and the final round.
inline RunRecord run(const GameSpec& game, const AlgorithmParams& params,
                     const std::optional<ActionProfile>& x0 = {},
                     const std::vector<double>* x_star = nullptr) {
    params.validate();
    if (x_star && static_cast<int>(x_star->size()) != game.dimension()) {
        throw ValidationError("reference equilibrium has wrong length");
    }

    RunRecord record;
    record.rng_algorithm = kRngAlgorithm;
    record.version = kVersion;
    record.seed = params.seed;
    record.alpha = params.alpha;
    record.mu_mode = to_string(params.mu.mode);
    record.mu0 = params.mu.mu0;
    record.mu_min = params.mu.mu_min;
    record.record_every = params.record_every;
    record.threads = params.threads;

    const std::uint64_t evals_before = game.oracle_evaluations();
    SeekerState state = init(game, params, x0);
    record.series.push_back(detail::snapshot(game, state, params, x_star));

    bool stopped_early = false;
    ActionProfile x_prev;
    for (std::int64_t t = 0; t < params.max_iters; ++t) {
        x_prev = state.x;
        step(state, game, params);
        const bool due = state.t % params.record_every == 0;
        const bool last = state.t == params.max_iters;
        if (params.stop_tol) {
            double sq = 0.0;
            for (std::size_t g = 0; g < state.x.size(); ++g) {
                const double d = state.x[g] - x_prev[g];
                sq += d * d;
            }
            if (std::sqrt(sq) / params.alpha <= *params.stop_tol) stopped_early = true;
        }
        if (due || last || stopped_early) {
            record.series.push_back(detail::snapshot(game, state, params, x_star));
        }
        if (stopped_early) break;
    }

    record.summary.iterations = state.t;
    record.summary.stopped_early = stopped_early;
    record.summary.final_tracking_error = record.series.back().tracking_error;
    record.summary.final_gap = record.series.back().nash_gap;
    record.summary.oracle_evaluations = game.oracle_evaluations() - evals_before;
    return record;
}

}  // namespace nashseek
