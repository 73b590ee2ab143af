#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nashseek/analysis.hpp"
#include "nashseek/config.hpp"
#include "nashseek/cournot.hpp"
#include "nashseek/errors.hpp"
#include "nashseek/io.hpp"
#include "nashseek/seeker.hpp"

namespace nashseek::cli {

inline constexpr const char* kOutputRootEnv = "NASHSEEK_OUTPUT_ROOT";

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<std::int64_t> iters;
};

inline RunConfig apply_overrides(RunConfig cfg, const Overrides& o) {
    if (o.seed) cfg.params.seeds = {*o.seed};
    if (o.alpha) {
        cfg.params.alpha = *o.alpha;
        cfg.params.alphas = {*o.alpha};
    }
    if (o.iters) cfg.params.max_iters = *o.iters;
    return cfg;
}

// --output-dir wins; otherwise the env root (with the config directory under
// it); otherwise the config directory alone.
inline std::filesystem::path resolve_output_dir(const RunConfig& cfg,
                                                const std::optional<std::string>& flag) {
    if (flag) return *flag;
    if (const char* root = std::getenv(kOutputRootEnv)) {
        return std::filesystem::path(root) / cfg.output.directory;
    }
    return cfg.output.directory;
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    bool all_ok = true;
    const GameSpec game = build_game(cfg);
    out << "game: " << game.dimension() << " players in " << game.num_coalitions()
        << " coalitions\n";
    for (int i = 0; i < game.num_coalitions(); ++i) {
        const GraphChecks checks = validate_graph(game.graph(i).weights);
        out << "graph " << (i + 1) << ": " << checks.describe() << "\n";
        all_ok = all_ok && checks.all_passed();
    }
    if (!all_ok) {
        out << "validation FAILED\n";
        return kExitValidation;
    }
    out << "all checks passed\n";
    return kExitOk;
}

inline int cmd_run(const RunConfig& cfg, const std::filesystem::path& outdir, bool quiet,
                   std::ostream& out) {
    ensure_directory(outdir);
    const GameSpec game = build_game(cfg);

    std::optional<ActionProfile> x_star;
    if (game.has_subgradients()) {
        x_star = nash_oracle(game, cfg.analysis.tol, {}, cfg.analysis.gamma0).x_star;
    }

    std::vector<RunRecord> records;
    for (std::uint64_t seed : cfg.params.seeds) {
        AlgorithmParams params = to_params(cfg);
        params.seed = seed;
        RunRecord record = run(game, params, {}, x_star ? &*x_star : nullptr);
        write_trajectory_csv(outdir / ("trajectory_seed" + std::to_string(seed) + ".csv"), game,
                             record);
        records.push_back(std::move(record));
    }
    write_metadata(outdir / "metadata.json", cfg, "run");
    {
        auto report = open_output(outdir / "report.txt");
        write_run_report(report, game, cfg, records);
    }
    if (!quiet) {
        write_run_report(out, game, cfg, records);
        out << "wrote " << outdir.string() << "\n";
    }
    return kExitOk;
}

inline int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& outdir, bool quiet,
                     std::ostream& out) {
    ensure_directory(outdir);
    const GameSpec game = build_game(cfg);

    std::optional<ActionProfile> x_star;
    if (game.has_subgradients()) {
        x_star = nash_oracle(game, cfg.analysis.tol, {}, cfg.analysis.gamma0).x_star;
    }

    std::vector<SweepRow> rows;
    // steady-state mean gap over the last 10% of the horizon, per (alpha, seed)
    std::map<double, std::vector<double>> steady_by_alpha;
    for (double alpha : cfg.params.alphas) {
        for (std::uint64_t seed : cfg.params.seeds) {
            AlgorithmParams params = to_params(cfg);
            params.alpha = alpha;
            params.seed = seed;
            const RunRecord record = run(game, params, {}, x_star ? &*x_star : nullptr);
            const std::int64_t tail_from = cfg.params.max_iters - cfg.params.max_iters / 10;
            double tail_sum = 0.0;
            std::int64_t tail_count = 0;
            for (const RunStep& s : record.series) {
                rows.push_back(SweepRow{s.t, alpha, seed, s.nash_gap.value_or(0.0),
                                        s.tracking_error});
                if (s.t >= tail_from && s.nash_gap) {
                    tail_sum += *s.nash_gap;
                    ++tail_count;
                }
            }
            if (tail_count > 0) steady_by_alpha[alpha].push_back(tail_sum / tail_count);
        }
    }
    write_sweep_csv(outdir / "sweep.csv", rows);
    write_metadata(outdir / "metadata.json", cfg, "sweep");
    {
        auto report = open_output(outdir / "steady_state.txt");
        report << "steady-state mean nash gap over the last 10% of iterations\n";
        for (const auto& [alpha, gaps] : steady_by_alpha) {
            double mean = 0.0;
            for (double g : gaps) mean += g;
            mean /= static_cast<double>(gaps.size());
            report << "alpha=" << format_double(alpha) << " mean_gap=" << format_double(mean)
                   << " runs=" << gaps.size() << "\n";
        }
    }
    if (!quiet) out << "wrote " << outdir.string() << "\n";
    return kExitOk;
}

inline int cmd_analyze(const RunConfig& cfg, const std::filesystem::path& outdir, bool quiet,
                       std::ostream& out) {
    ensure_directory(outdir);
    const GameSpec game = build_game(cfg);

    double chi = 0.0;
    bool chi_estimated = false;
    if (cfg.analysis.chi) {
        chi = *cfg.analysis.chi;
    } else {
        if (!game.has_subgradients()) {
            throw ValidationError(
                "analysis.chi not given and the game has no analytic subgradients to estimate it");
        }
        SplitMix64 rng(derive_stream_seed(cfg.analysis.analysis_seed, 0xC41));
        chi = estimate_chi(game, cfg.analysis.chi_samples, rng);
        chi_estimated = true;
    }

    std::vector<double> lipschitz;
    if (cfg.analysis.d_override) {
        lipschitz.assign(static_cast<std::size_t>(game.dimension()), *cfg.analysis.d_override);
    } else {
        lipschitz = estimate_lipschitz_all(game, cfg.analysis.lipschitz_samples,
                                           cfg.analysis.analysis_seed);
    }

    const ConvergenceConstants constants = build_constants(game, chi, lipschitz, cfg.analysis.mu_ref);
    const StepSizeBound bound = max_step_size(constants);

    {
        auto rho_csv = open_output(outdir / "rho_curve.csv");
        rho_csv << "alpha,rho\n";
        const std::int64_t grid = cfg.analysis.alpha_grid;
        for (std::int64_t g = 1; g <= grid; ++g) {
            const double alpha = bound.alpha_max * static_cast<double>(g) /
                                 static_cast<double>(grid + 1);
            rho_csv << format_double(alpha) << ',' << format_double(spectral_radius_M(alpha, constants))
                    << '\n';
        }
    }
    {
        auto report = open_output(outdir / "analysis.txt");
        report << "nashseek analysis report\n";
        report << "chi_source = " << (chi_estimated ? "estimated" : "config") << "\n";
        write_constants_report(report, constants, bound);
        for (double alpha : cfg.params.alphas) {
            if (alpha < bound.alpha_max) {
                const BoundReport b = steady_state_bounds(alpha, constants);
                report << "alpha=" << format_double(alpha) << " rho=" << format_double(b.rho)
                       << " x_bound=" << format_double(b.x_bound)
                       << " phi_bound=" << format_double(b.phi_bound) << "\n";
            } else {
                report << "alpha=" << format_double(alpha)
                       << " INADMISSIBLE (alpha_max=" << format_double(bound.alpha_max) << ")\n";
            }
        }
    }
    write_metadata(outdir / "metadata.json", cfg, "analyze");
    if (!quiet) out << "wrote " << outdir.string() << "\n";
    return kExitOk;
}

inline int cmd_bench(const RunConfig& cfg, const std::filesystem::path& outdir, bool quiet,
                     std::ostream& out) {
    ensure_directory(outdir);
    if (cfg.game.benchmark != "cournot") {
        throw ValidationError("bench requires game.benchmark = \"cournot\"");
    }
    const GameSpec game = build_game(cfg);

    BenchmarkOptions opts;
    opts.alphas = cfg.params.alphas;
    opts.iters = cfg.params.max_iters;
    opts.seeds = cfg.params.seeds;
    opts.mu.mu0 = cfg.params.mu0;
    opts.mu.mode = mu_mode_from_string(cfg.params.mu_mode);
    opts.mu.mu_min = cfg.params.mu_min;
    opts.chi = cfg.analysis.chi;
    opts.mu_ref = cfg.analysis.mu_ref;
    opts.tol = cfg.analysis.tol;
    opts.lipschitz_samples = cfg.analysis.lipschitz_samples;
    opts.chi_samples = cfg.analysis.chi_samples;
    opts.gamma0 = cfg.analysis.gamma0;
    opts.threads = cfg.params.threads;
    opts.record_every = cfg.params.record_every;
    opts.analysis_seed = cfg.analysis.analysis_seed;
    if (cfg.graph.kind == "ring") {
        opts.topology = "ring(n=6, self_weight=" + format_double(cfg.graph.self_weight) +
                        ") per coalition";
    } else {
        opts.topology = cfg.graph.kind + " per coalition";
    }

    const BenchmarkReport report = run_benchmark(game, opts);

    std::vector<SweepRow> rows;
    for (const BenchmarkRun& r : report.runs) {
        for (const RunStep& s : r.record.series) {
            rows.push_back(SweepRow{s.t, r.alpha, r.seed, s.nash_gap.value_or(0.0),
                                    s.tracking_error});
        }
        // action trajectories (one file per alpha, first seed)
        if (r.seed == cfg.params.seeds.front()) {
            write_trajectory_csv(outdir / ("trajectory_alpha" + format_double(r.alpha) + ".csv"),
                                 game, r.record);
        }
    }
    write_sweep_csv(outdir / "sweep.csv", rows);
    write_metadata(outdir / "metadata.json", cfg, "bench");
    {
        auto report_out = open_output(outdir / "bench_report.txt");
        write_benchmark_report(report_out, report);
    }
    if (!quiet) {
        write_benchmark_report(out, report);
        out << "wrote " << outdir.string() << "\n";
    }
    return kExitOk;
}

// Full CLI entry; the binary's main() forwards here, and tests call it
// directly with argument vectors.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"gradient-free Nash equilibrium seeking for coalition games"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir_flag;
    std::uint64_t seed_flag = 0;
    double alpha_flag = 0.0;
    std::int64_t iters_flag = 0;
    bool quiet = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (JSON)")->required();
        cmd->add_option("--output-dir", output_dir_flag,
                        "output directory (default: config output.directory under $" +
                            std::string(kOutputRootEnv) + ")");
        cmd->add_option("--seed", seed_flag, "override the config seed list with a single seed");
        cmd->add_option("--alpha", alpha_flag, "override the step-size (and the sweep grid)");
        cmd->add_option("--iters", iters_flag, "override the iteration count");
        cmd->add_flag("--quiet", quiet, "suppress console output");
    };

    CLI::App* validate = app.add_subcommand("validate", "check the config, game and graphs");
    CLI::App* run_cmd = app.add_subcommand("run", "run the seeker per seed, write trajectories");
    CLI::App* sweep = app.add_subcommand("sweep", "run the alpha grid x seeds, write gap series");
    CLI::App* analyze = app.add_subcommand("analyze", "convergence constants and bounds");
    CLI::App* bench = app.add_subcommand("bench", "full Cournot benchmark");
    for (CLI::App* cmd : {validate, run_cmd, sweep, analyze, bench}) add_common(cmd);

    try {
        // CLI11's vector overload expects the arguments reversed.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    CLI::App* active = app.get_subcommands().front();
    Overrides overrides;
    std::optional<std::string> output_dir;
    if (active->count("--output-dir") > 0) output_dir = output_dir_flag;
    if (active->count("--seed") > 0) overrides.seed = seed_flag;
    if (active->count("--alpha") > 0) overrides.alpha = alpha_flag;
    if (active->count("--iters") > 0) overrides.iters = iters_flag;

    try {
        const RunConfig cfg = apply_overrides(load_config(config_path), overrides);
        const std::filesystem::path outdir = resolve_output_dir(cfg, output_dir);
        if (validate->parsed()) return cmd_validate(cfg, out);
        if (run_cmd->parsed()) return cmd_run(cfg, outdir, quiet, out);
        if (sweep->parsed()) return cmd_sweep(cfg, outdir, quiet, out);
        if (analyze->parsed()) return cmd_analyze(cfg, outdir, quiet, out);
        if (bench->parsed()) return cmd_bench(cfg, outdir, quiet, out);
        err << "error: no subcommand\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace nashseek::cli
