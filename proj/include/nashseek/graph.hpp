#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nashseek/errors.hpp"
#include "nashseek/matrix.hpp"
#include "nashseek/rng.hpp"

namespace nashseek {

// Absolute tolerance for the stochasticity checks. Weights are either entered
// exactly or constructed from exact expressions; a loose tolerance would mask
// config bugs.
inline constexpr double kStochasticTol = 1e-12;

struct GraphChecks {
    bool nonnegative = false;
    bool row_stochastic = false;
    bool column_stochastic = false;
    bool self_loops = false;
    bool strongly_connected = false;
    double max_row_error = 0.0;
    double max_col_error = 0.0;
    double min_diagonal = 0.0;

    bool all_passed() const {
        return nonnegative && row_stochastic && column_stochastic && self_loops &&
               strongly_connected;
    }

    std::string describe() const {
        auto mark = [](bool ok) { return ok ? "PASS" : "FAIL"; };
        std::string s;
        s += std::string("nonnegativity ") + mark(nonnegative);
        s += std::string("; row-stochastic ") + mark(row_stochastic);
        s += std::string("; column-stochastic ") + mark(column_stochastic);
        s += std::string("; self-loops ") + mark(self_loops);
        s += std::string("; strong-connectivity ") + mark(strongly_connected);
        return s;
    }
};

namespace detail {

// Reachability on the positive-entry pattern. Edge (l -> j) exists when
// A[j][l] > 0, i.e. node j hears from node l.
inline std::vector<bool> reachable(const Matrix& a, bool reverse) {
    const int n = a.rows;
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w = 0; w < n; ++w) {
            const double entry = reverse ? a.at(w, v) : a.at(v, w);
            if (entry > 0.0 && !seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

}  // namespace detail

inline GraphChecks validate_graph(const Matrix& a) {
    if (!a.square() || a.rows == 0) {
        throw ValidationError("validate_graph: matrix is not square (" +
                              std::to_string(a.rows) + "x" + std::to_string(a.cols) + ")");
    }
    const int n = a.rows;
    GraphChecks checks;
    checks.nonnegative = true;
    checks.min_diagonal = a.at(0, 0);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (a.at(r, c) < 0.0) checks.nonnegative = false;
        }
        checks.min_diagonal = std::min(checks.min_diagonal, a.at(r, r));
    }
    checks.self_loops = checks.min_diagonal > 0.0;

    for (int r = 0; r < n; ++r) {
        double sum = 0.0;
        for (int c = 0; c < n; ++c) sum += a.at(r, c);
        checks.max_row_error = std::max(checks.max_row_error, std::abs(sum - 1.0));
    }
    for (int c = 0; c < n; ++c) {
        double sum = 0.0;
        for (int r = 0; r < n; ++r) sum += a.at(r, c);
        checks.max_col_error = std::max(checks.max_col_error, std::abs(sum - 1.0));
    }
    checks.row_stochastic = checks.max_row_error <= kStochasticTol;
    checks.column_stochastic = checks.max_col_error <= kStochasticTol;

    const auto fwd = detail::reachable(a, false);
    const auto bwd = detail::reachable(a, true);
    checks.strongly_connected =
        std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
        std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
    return checks;
}

// Doubly-stochastic mixing matrix of one coalition's digraph.
struct CoalitionGraph {
    Matrix weights;

    int size() const { return weights.rows; }
};

// Wraps a weight matrix after running the full check set.
inline CoalitionGraph make_graph(Matrix a) {
    const GraphChecks checks = validate_graph(a);
    if (!checks.all_passed()) {
        throw ValidationError("invalid coalition graph: " + checks.describe());
    }
    return CoalitionGraph{std::move(a)};
}

// Directed cycle j <- j-1 (mod n) plus self loops. Circulant, hence doubly
// stochastic; strongly connected for every n >= 1.
inline CoalitionGraph build_ring(int n, double self_weight) {
    if (n < 1) throw ValidationError("build_ring: n must be >= 1");
    if (!(self_weight > 0.0 && self_weight < 1.0)) {
        throw ValidationError("build_ring: self_weight must lie in (0,1)");
    }
    Matrix a(n, n);
    for (int j = 0; j < n; ++j) {
        a.at(j, j) += self_weight;
        a.at(j, (j + n - 1) % n) += 1.0 - self_weight;
    }
    return make_graph(std::move(a));
}

inline CoalitionGraph build_complete(int n) {
    if (n < 1) throw ValidationError("build_complete: n must be >= 1");
    Matrix a(n, n, 1.0 / n);
    return make_graph(std::move(a));
}

// Spectral norm of A - (1/n) 11^T via power iteration on the Gram matrix
// (A-J)^T (A-J). Tolerance 1e-12 on the eigenvalue, iteration cap 10000.
inline double contraction_sigma(const CoalitionGraph& g) {
    const int n = g.size();
    if (n == 0) throw ValidationError("contraction_sigma: empty graph");
    const double j = 1.0 / n;
    Matrix m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m.at(r, c) = g.weights.at(r, c) - j;

    Matrix gram(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += m.at(k, r) * m.at(k, c);
            gram.at(r, c) = s;
        }
    }

    // Deterministic pseudo-random start; 1 is in the kernel of A-J, so a
    // structured start could sit orthogonal to the top eigenvector.
    SplitMix64 rng(0x5EEDu);
    std::vector<double> v(n);
    double norm = 0.0;
    for (double& x : v) {
        x = rng.next_unit() - 0.5;
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;

    std::vector<double> w(n);
    double lambda = 0.0;
    for (int iter = 0; iter < 10000; ++iter) {
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int c = 0; c < n; ++c) s += gram.at(r, c) * v[c];
            w[r] = s;
        }
        double wnorm = 0.0, rayleigh = 0.0;
        for (int r = 0; r < n; ++r) {
            wnorm += w[r] * w[r];
            rayleigh += v[r] * w[r];
        }
        wnorm = std::sqrt(wnorm);
        if (wnorm == 0.0) return 0.0;  // A equals its own averaging matrix
        for (int r = 0; r < n; ++r) v[r] = w[r] / wnorm;
        if (iter > 0 && std::abs(rayleigh - lambda) <= 1e-12 * std::max(1.0, rayleigh)) {
            lambda = rayleigh;
            break;
        }
        lambda = rayleigh;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

struct KappaPair {
    double sigma_sq = 0.0;   // sigma^2
    double varsigma = 1.0;   // (1 + sigma^2) / (1 - sigma^2)
};

inline KappaPair coalition_kappa(const CoalitionGraph& g) {
    const double sigma = contraction_sigma(g);
    if (sigma >= 1.0) {
        throw ValidationError("coalition_kappa: contraction factor >= 1; graph is not valid");
    }
    const double s2 = sigma * sigma;
    return KappaPair{s2, (1.0 + s2) / (1.0 - s2)};
}

}  // namespace nashseek
