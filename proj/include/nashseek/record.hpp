#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nashseek {

struct RunStep {
    std::int64_t t = 0;
    std::vector<double> x;
    std::optional<double> nash_gap;           // ||x_t - x*||, when a reference is supplied
    double tracking_error = 0.0;              // sum_{i,k} ||phi^i_k - 1*phibar^i_k||^2
    std::vector<double> coalition_consensus;  // per-coalition share of the above
    double conservation_residual = 0.0;       // max_{i,k} |mean_j phi - mean_j pi|
    double mu = 0.0;                          // schedule value at t (player 0)
};

struct RunSummary {
    std::int64_t iterations = 0;
    bool stopped_early = false;
    double final_tracking_error = 0.0;
    std::optional<double> final_gap;
    std::uint64_t oracle_evaluations = 0;
};

// Everything needed to replay and plot one seeker run.
struct RunRecord {
    std::string rng_algorithm;
    std::string version;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::string mu_mode;
    double mu0 = 0.0;
    double mu_min = 0.0;
    std::int64_t record_every = 1;
    int threads = 1;
    std::vector<RunStep> series;
    RunSummary summary;
};

}  // namespace nashseek
