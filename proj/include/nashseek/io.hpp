#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nashseek/analysis.hpp"
#include "nashseek/config.hpp"
#include "nashseek/cournot.hpp"
#include "nashseek/errors.hpp"
#include "nashseek/game.hpp"
#include "nashseek/record.hpp"
#include "nashseek/rng.hpp"
#include "nashseek/version.hpp"

namespace nashseek {

// Round-trippable and byte-stable; trajectory files must compare equal across
// reruns.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path.string());
    return out;
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// Schema: t,coalition,player,action (coalition and player 1-based).
inline void write_trajectory_csv(const std::filesystem::path& path, const GameSpec& game,
                                 const RunRecord& record) {
    auto out = open_output(path);
    out << "t,coalition,player,action\n";
    for (const RunStep& step : record.series) {
        for (int i = 0; i < game.num_coalitions(); ++i) {
            for (int j = 0; j < game.coalition_size(i); ++j) {
                out << step.t << ',' << (i + 1) << ',' << (j + 1) << ','
                    << format_double(step.x[static_cast<std::size_t>(game.coord(i, j))]) << '\n';
            }
        }
    }
}

struct SweepRow {
    std::int64_t t = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    double nash_gap = 0.0;
    double tracking_error = 0.0;
};

// Schema: t,alpha,seed,nash_gap,tracking_error (long format, one row per
// recorded step per run).
inline void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    auto out = open_output(path);
    out << "t,alpha,seed,nash_gap,tracking_error\n";
    for (const SweepRow& r : rows) {
        out << r.t << ',' << format_double(r.alpha) << ',' << r.seed << ','
            << format_double(r.nash_gap) << ',' << format_double(r.tracking_error) << '\n';
    }
}

// Everything needed to reproduce the run bit-exactly: effective config,
// seeds, RNG algorithm, code version.
inline void write_metadata(const std::filesystem::path& path, const RunConfig& cfg,
                           const std::string& command) {
    nlohmann::json meta;
    meta["version"] = kVersion;
    meta["rng_algorithm"] = kRngAlgorithm;
    meta["command"] = command;
    meta["seeds"] = cfg.params.seeds;
    meta["config"] = to_json(cfg);
    auto out = open_output(path);
    out << meta.dump(2) << "\n";
}

inline void write_run_report(std::ostream& out, const GameSpec& game, const RunConfig& cfg,
                             const std::vector<RunRecord>& records) {
    out << "nashseek run report\n";
    out << "version = " << kVersion << "\n";
    out << "rng = " << kRngAlgorithm << "\n";
    out << "players = " << game.dimension() << " in " << game.num_coalitions()
        << " coalitions\n";
    out << "alpha = " << format_double(cfg.params.alpha) << "\n";
    out << "mu = " << cfg.params.mu_mode << " mu0=" << format_double(cfg.params.mu0)
        << " mu_min=" << format_double(cfg.params.mu_min) << "\n";
    for (const RunRecord& r : records) {
        out << "seed " << r.seed << ": iterations=" << r.summary.iterations
            << " oracle_evaluations=" << r.summary.oracle_evaluations
            << " final_tracking_error=" << format_double(r.summary.final_tracking_error);
        if (r.summary.final_gap) out << " final_gap=" << format_double(*r.summary.final_gap);
        if (r.summary.stopped_early) out << " stopped_early";
        out << "\n";
    }
}

inline void write_constants_report(std::ostream& out, const ConvergenceConstants& c,
                                   const StepSizeBound& bound) {
    out << "strong_monotonicity_chi = " << format_double(c.chi) << "\n";
    out << "lipschitz_max = " << format_double(c.d_max) << "\n";
    out << "mu_ref = " << format_double(c.mu_ref) << "\n";
    out << "smoothed_grad_lipschitz_L = " << format_double(c.smoothed_grad_lipschitz)
        << "  (quoted at mu_ref; grows as 1/mu while the guarantee takes mu -> 0)\n";
    out << "oracle_moment_bound_B = " << format_double(c.oracle_moment_bound) << "\n";
    out << "sigma_bar = " << format_double(c.sigma_bar) << "\n";
    out << "varsigma = " << format_double(c.varsigma) << "\n";
    out << "k1 = " << format_double(c.k1) << "\n";
    out << "k2 = " << format_double(c.k2) << "\n";
    out << "k3 = " << format_double(c.k3) << "\n";
    out << "k4 = " << format_double(c.k4) << "\n";
    out << "k5 = " << format_double(c.k5) << "\n";
    out << "k6 = " << format_double(c.k6) << "\n";
    out << "k7 = " << format_double(c.k7) << "\n";
    out << "alpha_max = " << format_double(bound.alpha_max);
    if (bound.k4_zero_fallback) out << "  (k4 = 0; only the 1/k1 branch applies)";
    out << "\n";
}

inline void write_benchmark_report(std::ostream& out, const BenchmarkReport& report) {
    out << "nashseek benchmark report\n";
    out << "version = " << kVersion << "\n";
    out << "topology = " << report.topology << "\n";
    out << "action_box = [" << format_double(report.box.lower) << ", "
        << format_double(report.box.upper) << "]\n";
    out << "x_star_vi_residual = " << format_double(report.vi_residual_value) << "\n";
    out << "reference_solver_iterations = " << report.oracle_iterations << "\n";
    out << "chi = " << format_double(report.chi_used)
        << (report.chi_estimated ? "  (estimated from sampled pairs)" : "  (config)") << "\n";
    write_constants_report(out, report.constants, report.step_bound);
    out << "x_star =";
    for (double v : report.x_star) out << ' ' << format_double(v);
    out << "\n";
    for (const BenchmarkRun& r : report.runs) {
        out << "alpha=" << format_double(r.alpha) << " seed=" << r.seed
            << " admissible=" << (r.admissible ? "yes" : "NO (exceeds alpha_max)")
            << " initial_gap=" << format_double(r.initial_gap)
            << " steady_gap=" << format_double(r.steady_gap)
            << " final_gap=" << format_double(r.final_gap)
            << " half_gap_at=" << r.half_gap_iteration << "\n";
    }
}

}  // namespace nashseek
