#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nashseek/errors.hpp"
#include "nashseek/game.hpp"
#include "nashseek/graph.hpp"
#include "nashseek/rng.hpp"

namespace nashseek {

// Constants of the two-state error recursion
//   Psi_{t+1} <= M_alpha Psi_t + Upsilon_alpha,
//   M_alpha = [[1 - k1*a, k2*a + k3*a^2], [0, 1 - k5 + k4*a^2]],
//   Upsilon_alpha = [k6*a^2, k7*a^2],
// tracking the squared distance to the equilibrium and the total gradient
// tracking error.
struct ConvergenceConstants {
    double chi = 0.0;                    // strong monotonicity of the game mapping
    std::vector<double> lipschitz;       // per player, flattened by global index
    double d_max = 0.0;
    double mu_ref = 0.0;                 // smoothing parameter the L constant is quoted at
    double smoothed_grad_lipschitz = 0.0;  // L = max sqrt(n_i) * D / mu_ref
    double oracle_moment_bound = 0.0;      // B = max sqrt(n_i + 4) * D
    double sigma_bar = 0.0;              // max_i sigma_{A^i}
    double varsigma = 1.0;               // max_i (1 + sigma^2) / (1 - sigma^2)
    std::vector<double> sigma_per_coalition;
    double k1 = 0.0, k2 = 0.0, k3 = 6.0, k4 = 0.0, k5 = 0.0, k6 = 0.0, k7 = 0.0;
};

struct StepSizeBound {
    double alpha_max = 0.0;
    bool k4_zero_fallback = false;  // degenerate constants: only the 1/k1 branch applies
};

struct BoundReport {
    double alpha = 0.0;
    double alpha_max = 0.0;
    double rho = 0.0;       // spectral radius of M_alpha
    double x_bound = 0.0;   // steady-state bound on E||x_t - x*||^2
    double phi_bound = 0.0; // steady-state bound on the total tracking error
};

// Sampled lower bound on the Lipschitz constant, inflated by a safety factor.
inline double estimate_lipschitz(const std::function<double(std::span<const double>)>& f,
                                 const std::vector<BoxConstraint>& boxes, std::int64_t samples,
                                 SplitMix64& rng) {
    if (samples < 2) throw ValidationError("estimate_lipschitz: samples must be >= 2");
    const std::size_t n = boxes.size();
    std::vector<double> a(n), b(n);
    double best = 0.0;
    for (std::int64_t s = 0; s < samples; ++s) {
        double dist_sq = 0.0;
        for (std::size_t g = 0; g < n; ++g) {
            a[g] = boxes[g].lower + rng.next_unit() * (boxes[g].upper - boxes[g].lower);
            b[g] = boxes[g].lower + rng.next_unit() * (boxes[g].upper - boxes[g].lower);
            const double d = a[g] - b[g];
            dist_sq += d * d;
        }
        if (dist_sq <= 0.0) continue;
        const double slope = std::abs(f(a) - f(b)) / std::sqrt(dist_sq);
        best = std::max(best, slope);
    }
    return 1.2 * best;
}

inline std::vector<BoxConstraint> all_boxes(const GameSpec& game) {
    std::vector<BoxConstraint> boxes;
    boxes.reserve(static_cast<std::size_t>(game.dimension()));
    for (int g = 0; g < game.dimension(); ++g) boxes.push_back(game.box_at(g));
    return boxes;
}

// Per-player Lipschitz estimates over the full action box, declared bounds
// taking precedence. Flattened by global player index.
inline std::vector<double> estimate_lipschitz_all(const GameSpec& game, std::int64_t samples,
                                                  std::uint64_t seed) {
    const auto boxes = all_boxes(game);
    std::vector<double> d(static_cast<std::size_t>(game.dimension()));
    for (int i = 0; i < game.num_coalitions(); ++i) {
        for (int j = 0; j < game.coalition_size(i); ++j) {
            const int g = game.coord(i, j);
            if (auto declared = game.declared_lipschitz(i, j)) {
                d[static_cast<std::size_t>(g)] = *declared;
                continue;
            }
            SplitMix64 rng(derive_stream_seed(seed, static_cast<std::uint64_t>(g) + 0x11));
            d[static_cast<std::size_t>(g)] = estimate_lipschitz(
                [&](std::span<const double> x) { return game.evaluate(i, j, x); }, boxes,
                samples, rng);
        }
    }
    return d;
}

// Stacked coalition-averaged analytic subgradients: the game mapping in the
// vanishing-smoothing limit. Requires analytic subgradients on every player.
inline std::vector<double> game_mapping(const GameSpec& game, std::span<const double> x) {
    game.check_profile(x);
    std::vector<double> f0(static_cast<std::size_t>(game.dimension()), 0.0);
    for (int i = 0; i < game.num_coalitions(); ++i) {
        const int n_i = game.coalition_size(i);
        const int off = game.coalition_offset(i);
        for (int j = 0; j < n_i; ++j) {
            const auto grad = game.subgradient(i, j, x);
            for (int k = 0; k < n_i; ++k) {
                f0[static_cast<std::size_t>(off + k)] += grad[static_cast<std::size_t>(k)] / n_i;
            }
        }
    }
    return f0;
}

// Sampled lower bound on the strong monotonicity constant:
// min <F0(x) - F0(x'), x - x'> / ||x - x'||^2 over random pairs.
inline double estimate_chi(const GameSpec& game, std::int64_t samples, SplitMix64& rng) {
    if (samples < 1) throw ValidationError("estimate_chi: samples must be >= 1");
    double chi = std::numeric_limits<double>::infinity();
    for (std::int64_t s = 0; s < samples; ++s) {
        const auto x = game.sample_feasible(rng);
        const auto y = game.sample_feasible(rng);
        double dist_sq = 0.0;
        for (std::size_t g = 0; g < x.size(); ++g) {
            const double d = x[g] - y[g];
            dist_sq += d * d;
        }
        if (dist_sq < 1e-6) continue;  // skip near-coincident pairs (||dx|| >= 1e-3)
        const auto fx = game_mapping(game, x);
        const auto fy = game_mapping(game, y);
        double inner = 0.0;
        for (std::size_t g = 0; g < x.size(); ++g) inner += (fx[g] - fy[g]) * (x[g] - y[g]);
        chi = std::min(chi, inner / dist_sq);
    }
    if (!std::isfinite(chi)) throw NumericalError("estimate_chi: no usable sample pairs");
    return chi;
}

inline ConvergenceConstants build_constants(const GameSpec& game, double chi,
                                            std::vector<double> lipschitz, double mu_ref) {
    if (!(chi > 0.0)) throw ValidationError("build_constants: chi must be > 0");
    if (!(mu_ref > 0.0)) throw ValidationError("build_constants: mu_ref must be > 0");
    if (static_cast<int>(lipschitz.size()) != game.dimension()) {
        throw ValidationError("build_constants: need one Lipschitz bound per player");
    }
    for (double d : lipschitz) {
        if (!(d >= 0.0)) throw ValidationError("build_constants: Lipschitz bounds must be >= 0");
    }

    ConvergenceConstants c;
    c.chi = chi;
    c.lipschitz = std::move(lipschitz);
    c.mu_ref = mu_ref;

    double sum_n_sq = 0.0, sum_n_sq_n4 = 0.0;
    for (int i = 0; i < game.num_coalitions(); ++i) {
        const int n_i = game.coalition_size(i);
        const double sigma = contraction_sigma(game.graph(i));
        c.sigma_per_coalition.push_back(sigma);
        c.sigma_bar = std::max(c.sigma_bar, sigma);
        c.varsigma = std::max(c.varsigma, (1.0 + sigma * sigma) / (1.0 - sigma * sigma));
        sum_n_sq += static_cast<double>(n_i) * n_i;
        sum_n_sq_n4 += static_cast<double>(n_i) * n_i * (n_i + 4);
        for (int j = 0; j < n_i; ++j) {
            const double d = c.lipschitz[static_cast<std::size_t>(game.coord(i, j))];
            c.d_max = std::max(c.d_max, d);
            c.smoothed_grad_lipschitz =
                std::max(c.smoothed_grad_lipschitz, std::sqrt(static_cast<double>(n_i)) * d / mu_ref);
            c.oracle_moment_bound =
                std::max(c.oracle_moment_bound, std::sqrt(static_cast<double>(n_i) + 4.0) * d);
        }
    }

    const double l = c.smoothed_grad_lipschitz;
    const double b = c.oracle_moment_bound;
    const double n_coalitions = static_cast<double>(game.num_coalitions());
    c.k1 = chi;
    c.k2 = 1.0 / chi;
    c.k3 = 6.0;
    c.k4 = 12.0 * l * l * c.varsigma * sum_n_sq;
    c.k5 = (1.0 - c.sigma_bar * c.sigma_bar) / 2.0;
    c.k6 = 6.0 * b * b * sum_n_sq_n4 + 2.0 * n_coalitions * b * b;
    c.k7 = 12.0 * l * l * b * b * c.varsigma * sum_n_sq * sum_n_sq_n4;
    return c;
}

// Admissible constant step-size range: alpha < min(1/k1, sqrt(k5/k4)).
inline StepSizeBound max_step_size(const ConvergenceConstants& c) {
    if (!(c.k1 > 0.0)) throw ValidationError("max_step_size: k1 must be > 0");
    StepSizeBound bound;
    if (c.k4 > 0.0) {
        bound.alpha_max = std::min(1.0 / c.k1, std::sqrt(c.k5 / c.k4));
    } else {
        bound.alpha_max = 1.0 / c.k1;
        bound.k4_zero_fallback = true;
    }
    return bound;
}

// rho(M_alpha); exact because M_alpha is upper triangular.
inline double spectral_radius_M(double alpha, const ConvergenceConstants& c) {
    return std::max(std::abs(1.0 - c.k1 * alpha), 1.0 - c.k5 + c.k4 * alpha * alpha);
}

// Steady-state limits of the error recursion, componentwise from
// (I - M_alpha)^{-1} Upsilon_alpha. Valid strictly inside the admissible
// step-size range.
inline BoundReport steady_state_bounds(double alpha, const ConvergenceConstants& c) {
    const StepSizeBound bound = max_step_size(c);
    if (!(alpha > 0.0) || alpha >= bound.alpha_max) {
        throw ValidationError("steady_state_bounds: alpha outside (0, alpha_max)");
    }
    const double gap = c.k5 - c.k4 * alpha * alpha;
    BoundReport report;
    report.alpha = alpha;
    report.alpha_max = bound.alpha_max;
    report.rho = spectral_radius_M(alpha, c);
    report.x_bound = (c.k6 * alpha * alpha * gap +
                      c.k7 * alpha * alpha * (c.k2 * alpha + c.k3 * alpha * alpha)) /
                     (c.k1 * alpha * gap);
    report.phi_bound = c.k7 * alpha * alpha / gap;
    return report;
}

inline double nash_gap(std::span<const double> x, std::span<const double> x_star) {
    if (x.size() != x_star.size()) {
        throw ValidationError("nash_gap: profiles have different lengths");
    }
    double sq = 0.0;
    for (std::size_t g = 0; g < x.size(); ++g) {
        const double d = x[g] - x_star[g];
        sq += d * d;
    }
    return std::sqrt(sq);
}

// Computable equilibrium certificate: || x - P_Omega[x - F0(x)] ||.
inline double vi_residual(const GameSpec& game, std::span<const double> x) {
    const auto f0 = game_mapping(game, x);
    double sq = 0.0;
    for (int g = 0; g < game.dimension(); ++g) {
        const double moved =
            project_box(x[static_cast<std::size_t>(g)] - f0[static_cast<std::size_t>(g)],
                        game.box_at(g));
        const double d = x[static_cast<std::size_t>(g)] - moved;
        sq += d * d;
    }
    return std::sqrt(sq);
}

struct NashOracleResult {
    ActionProfile x_star;
    double residual = 0.0;   // VI residual at the returned point
    std::int64_t iterations = 0;
};

// Independent reference solver: projected subgradient fixed-point iteration
// x <- P_Omega[x - gamma_t F0(x)] with gamma_t = gamma0 / sqrt(t+1), driven
// by the analytic subgradients, never by the black-box oracle. Accepts only
// once the step is tiny AND the VI residual certifies the point.
inline NashOracleResult nash_oracle(const GameSpec& game, double tol,
                                    const std::optional<ActionProfile>& x_start = {},
                                    double gamma0 = 0.5, std::int64_t max_iters = 500000) {
    if (!(tol > 0.0)) throw ValidationError("nash_oracle: tol must be > 0");
    if (!game.has_subgradients()) {
        throw ValidationError("nash_oracle: game has no analytic subgradients");
    }

    ActionProfile x;
    if (x_start) {
        game.check_profile(*x_start);
        x = game.project(*x_start);
    } else {
        x.resize(static_cast<std::size_t>(game.dimension()));
        for (int g = 0; g < game.dimension(); ++g) {
            const BoxConstraint& b = game.box_at(g);
            x[static_cast<std::size_t>(g)] = 0.5 * (b.lower + b.upper);
        }
    }

    const double residual_tol = 10.0 * tol;
    NashOracleResult result;
    for (std::int64_t t = 0; t < max_iters; ++t) {
        const double gamma = gamma0 / std::sqrt(static_cast<double>(t + 1));
        const auto f0 = game_mapping(game, x);
        double step_sq = 0.0;
        for (int g = 0; g < game.dimension(); ++g) {
            const double next =
                project_box(x[static_cast<std::size_t>(g)] - gamma * f0[static_cast<std::size_t>(g)],
                            game.box_at(g));
            const double d = next - x[static_cast<std::size_t>(g)];
            step_sq += d * d;
            x[static_cast<std::size_t>(g)] = next;
        }
        result.iterations = t + 1;
        if (std::sqrt(step_sq) <= tol) {
            const double res = vi_residual(game, x);
            if (res <= residual_tol) {
                result.x_star = x;
                result.residual = res;
                return result;
            }
            // Stagnation was a step-size artifact; keep iterating.
        }
    }
    const double res = vi_residual(game, x);
    if (res <= residual_tol) {
        result.x_star = x;
        result.residual = res;
        return result;
    }
    throw NumericalError("nash_oracle: no convergence after " + std::to_string(max_iters) +
                         " iterations (VI residual " + std::to_string(res) + ")");
}

struct SweepResult {
    ActionProfile x;
    double max_move = 0.0;
};

// One coordinate-wise best-response pass: each player coordinate is set to
// the minimizer of its coalition's cost along that coordinate (golden
// section; the costs are convex in the own coordinate). Cross-check for the
// reference solver, not part of the seeking algorithm.
inline SweepResult best_response_sweep(const GameSpec& game, std::span<const double> start,
                                       double tol = 1e-11) {
    game.check_profile(start);
    SweepResult result;
    result.x.assign(start.begin(), start.end());
    constexpr double kInvPhi = 0.6180339887498949;
    for (int i = 0; i < game.num_coalitions(); ++i) {
        for (int j = 0; j < game.coalition_size(i); ++j) {
            const int g = game.coord(i, j);
            const BoxConstraint& box = game.box_at(g);
            auto eval = [&](double v) {
                result.x[static_cast<std::size_t>(g)] = v;
                return coalition_cost(game, i, result.x);
            };
            double lo = box.lower, hi = box.upper;
            double m1 = hi - kInvPhi * (hi - lo);
            double m2 = lo + kInvPhi * (hi - lo);
            double f1 = eval(m1), f2 = eval(m2);
            while (hi - lo > tol) {
                if (f1 <= f2) {
                    hi = m2;
                    m2 = m1;
                    f2 = f1;
                    m1 = hi - kInvPhi * (hi - lo);
                    f1 = eval(m1);
                } else {
                    lo = m1;
                    m1 = m2;
                    f1 = f2;
                    m2 = lo + kInvPhi * (hi - lo);
                    f2 = eval(m2);
                }
            }
            const double best = 0.5 * (lo + hi);
            result.max_move = std::max(result.max_move,
                                       std::abs(best - start[static_cast<std::size_t>(g)]));
            result.x[static_cast<std::size_t>(g)] = best;
        }
    }
    return result;
}

}  // namespace nashseek
