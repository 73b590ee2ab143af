#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nashseek/cournot.hpp"
#include "nashseek/errors.hpp"
#include "nashseek/game.hpp"
#include "nashseek/graph.hpp"
#include "nashseek/seeker.hpp"
#include "nashseek/smoothing.hpp"

namespace nashseek {

struct GraphConfig {
    std::string kind = "ring";  // ring | complete | matrix
    double self_weight = 0.5;
    std::optional<Matrix> matrix;  // required when kind == "matrix"
};

struct QuadraticCost {
    double weight = 1.0;
    double center = 0.0;
    double offset = 0.0;
};

struct CustomPlayerConfig {
    BoxConstraint box{-1.0, 1.0};
    QuadraticCost cost;  // f(x) = weight * (x_self - center)^2 + offset
};

struct GameConfig {
    std::string benchmark;  // "cournot", or empty when a custom game is given
    std::optional<BoxConstraint> box;
    std::vector<std::vector<CustomPlayerConfig>> custom;  // coalitions of players
};

struct ParamsConfig {
    double alpha = 0.1;
    std::vector<double> alphas;  // sweep grid; defaults to {alpha}
    double mu0 = 0.1;
    std::string mu_mode = "harmonic";
    double mu_min = 1e-8;
    std::int64_t max_iters = 2000;
    std::vector<std::uint64_t> seeds{1};
    std::int64_t record_every = 1;
    std::optional<double> stop_tol;
    int threads = 1;
};

struct AnalysisConfig {
    std::optional<double> chi;
    std::optional<double> d_override;  // one bound applied to every player
    double mu_ref = 0.05;
    double tol = 1e-8;
    std::int64_t lipschitz_samples = 2000;
    std::int64_t chi_samples = 2000;
    double gamma0 = 0.5;
    std::int64_t alpha_grid = 100;
    std::uint64_t analysis_seed = 99;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv"};
};

struct RunConfig {
    GameConfig game;
    GraphConfig graph;
    ParamsConfig params;
    AnalysisConfig analysis;
    OutputConfig output;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& section,
                         std::initializer_list<const char*> known,
                         std::vector<std::string>& errors) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) errors.push_back("unknown key '" + section + "." + it.key() + "'");
    }
}

template <typename T>
bool fetch(const json& obj, const char* key, T& into, const std::string& section,
           std::vector<std::string>& errors) {
    if (!obj.contains(key)) return false;
    try {
        into = obj.at(key).get<T>();
        return true;
    } catch (const json::exception& e) {
        errors.push_back("bad value for '" + section + "." + key + "': " + e.what());
        return false;
    }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& root) {
    using detail::fetch;
    using detail::require_keys;
    std::vector<std::string> errors;
    RunConfig cfg;

    if (!root.is_object()) throw ValidationError("config root must be an object");
    require_keys(root, "", {"game", "graph", "params", "analysis", "output"}, errors);
    if (!root.contains("game")) errors.push_back("missing section 'game'");
    if (!root.contains("params")) errors.push_back("missing section 'params'");

    if (root.contains("game") && root.at("game").is_object()) {
        const auto& game = root.at("game");
        require_keys(game, "game", {"benchmark", "box", "custom"}, errors);
        fetch(game, "benchmark", cfg.game.benchmark, "game", errors);
        if (game.contains("box") && game.at("box").is_object()) {
            require_keys(game.at("box"), "game.box", {"lower", "upper"}, errors);
            BoxConstraint box;
            fetch(game.at("box"), "lower", box.lower, "game.box", errors);
            fetch(game.at("box"), "upper", box.upper, "game.box", errors);
            cfg.game.box = box;
        }
        if (game.contains("custom")) {
            if (!game.at("custom").is_array()) {
                errors.push_back("game.custom must be an array of coalitions");
            } else {
                int ci = 0;
                for (const auto& coalition : game.at("custom")) {
                    std::vector<CustomPlayerConfig> members;
                    if (!coalition.is_array()) {
                        errors.push_back("game.custom[" + std::to_string(ci) +
                                         "] must be an array of players");
                    } else {
                        for (const auto& player : coalition) {
                            const std::string where = "game.custom[" + std::to_string(ci) + "]";
                            require_keys(player, where,
                                         {"lower", "upper", "weight", "center", "offset"}, errors);
                            CustomPlayerConfig p;
                            fetch(player, "lower", p.box.lower, where, errors);
                            fetch(player, "upper", p.box.upper, where, errors);
                            fetch(player, "weight", p.cost.weight, where, errors);
                            fetch(player, "center", p.cost.center, where, errors);
                            fetch(player, "offset", p.cost.offset, where, errors);
                            members.push_back(p);
                        }
                    }
                    cfg.game.custom.push_back(std::move(members));
                    ++ci;
                }
            }
        }
    } else if (root.contains("game")) {
        errors.push_back("section 'game' must be an object");
    }

    if (root.contains("graph")) {
        const auto& graph = root.at("graph");
        if (!graph.is_object()) {
            errors.push_back("section 'graph' must be an object");
        } else {
            require_keys(graph, "graph", {"kind", "self_weight", "matrix"}, errors);
            fetch(graph, "kind", cfg.graph.kind, "graph", errors);
            fetch(graph, "self_weight", cfg.graph.self_weight, "graph", errors);
            if (graph.contains("matrix")) {
                std::vector<std::vector<double>> rows;
                if (fetch(graph, "matrix", rows, "graph", errors)) {
                    Matrix m(static_cast<int>(rows.size()),
                             rows.empty() ? 0 : static_cast<int>(rows.front().size()));
                    bool ragged = false;
                    for (int r = 0; r < m.rows; ++r) {
                        if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != m.cols) {
                            ragged = true;
                            break;
                        }
                        for (int c = 0; c < m.cols; ++c) {
                            m.at(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                        }
                    }
                    if (ragged) {
                        errors.push_back("graph.matrix rows have inconsistent lengths");
                    } else {
                        cfg.graph.matrix = std::move(m);
                    }
                }
            }
        }
    }

    if (root.contains("params")) {
        const auto& params = root.at("params");
        if (!params.is_object()) {
            errors.push_back("section 'params' must be an object");
        } else {
            require_keys(params, "params",
                         {"alpha", "alphas", "mu0", "mu_mode", "mu_min", "max_iters", "seeds",
                          "record_every", "stop_tol", "threads"},
                         errors);
            fetch(params, "alpha", cfg.params.alpha, "params", errors);
            fetch(params, "alphas", cfg.params.alphas, "params", errors);
            fetch(params, "mu0", cfg.params.mu0, "params", errors);
            fetch(params, "mu_mode", cfg.params.mu_mode, "params", errors);
            fetch(params, "mu_min", cfg.params.mu_min, "params", errors);
            fetch(params, "max_iters", cfg.params.max_iters, "params", errors);
            fetch(params, "seeds", cfg.params.seeds, "params", errors);
            fetch(params, "record_every", cfg.params.record_every, "params", errors);
            if (params.contains("stop_tol") && !params.at("stop_tol").is_null()) {
                double tol = 0.0;
                if (fetch(params, "stop_tol", tol, "params", errors)) cfg.params.stop_tol = tol;
            }
            fetch(params, "threads", cfg.params.threads, "params", errors);
        }
    }

    if (root.contains("analysis")) {
        const auto& analysis = root.at("analysis");
        if (!analysis.is_object()) {
            errors.push_back("section 'analysis' must be an object");
        } else {
            require_keys(analysis, "analysis",
                         {"chi", "d_override", "mu_ref", "tol", "lipschitz_samples",
                          "chi_samples", "gamma0", "alpha_grid", "analysis_seed"},
                         errors);
            if (analysis.contains("chi") && !analysis.at("chi").is_null()) {
                double chi = 0.0;
                if (fetch(analysis, "chi", chi, "analysis", errors)) cfg.analysis.chi = chi;
            }
            if (analysis.contains("d_override") && !analysis.at("d_override").is_null()) {
                double d = 0.0;
                if (fetch(analysis, "d_override", d, "analysis", errors)) cfg.analysis.d_override = d;
            }
            fetch(analysis, "mu_ref", cfg.analysis.mu_ref, "analysis", errors);
            fetch(analysis, "tol", cfg.analysis.tol, "analysis", errors);
            fetch(analysis, "lipschitz_samples", cfg.analysis.lipschitz_samples, "analysis", errors);
            fetch(analysis, "chi_samples", cfg.analysis.chi_samples, "analysis", errors);
            fetch(analysis, "gamma0", cfg.analysis.gamma0, "analysis", errors);
            fetch(analysis, "alpha_grid", cfg.analysis.alpha_grid, "analysis", errors);
            fetch(analysis, "analysis_seed", cfg.analysis.analysis_seed, "analysis", errors);
        }
    }

    if (root.contains("output")) {
        const auto& output = root.at("output");
        if (!output.is_object()) {
            errors.push_back("section 'output' must be an object");
        } else {
            require_keys(output, "output", {"directory", "formats"}, errors);
            fetch(output, "directory", cfg.output.directory, "output", errors);
            fetch(output, "formats", cfg.output.formats, "output", errors);
        }
    }

    // Semantic validation; all violations reported together.
    const bool has_benchmark = !cfg.game.benchmark.empty();
    const bool has_custom = !cfg.game.custom.empty();
    if (!has_benchmark && !has_custom) {
        errors.push_back("game: either 'benchmark' or 'custom' must be given");
    }
    if (has_benchmark && has_custom) {
        errors.push_back("game: 'benchmark' and 'custom' are mutually exclusive");
    }
    if (has_benchmark && cfg.game.benchmark != "cournot") {
        errors.push_back("game.benchmark: unknown benchmark '" + cfg.game.benchmark + "'");
    }
    if (cfg.game.box && !cfg.game.box->valid()) {
        errors.push_back("game.box: requires finite lower <= upper");
    }
    for (std::size_t i = 0; i < cfg.game.custom.size(); ++i) {
        if (cfg.game.custom[i].empty()) {
            errors.push_back("game.custom[" + std::to_string(i) + "]: coalition is empty");
        }
        for (const CustomPlayerConfig& p : cfg.game.custom[i]) {
            if (!p.box.valid()) {
                errors.push_back("game.custom[" + std::to_string(i) +
                                 "]: box requires finite lower <= upper");
            }
        }
    }
    if (cfg.graph.kind != "ring" && cfg.graph.kind != "complete" && cfg.graph.kind != "matrix") {
        errors.push_back("graph.kind: expected ring|complete|matrix");
    }
    if (cfg.graph.kind == "ring" && !(cfg.graph.self_weight > 0.0 && cfg.graph.self_weight < 1.0)) {
        errors.push_back("graph.self_weight: must lie in (0,1)");
    }
    if (cfg.graph.kind == "matrix" && !cfg.graph.matrix) {
        errors.push_back("graph.matrix: required when graph.kind is 'matrix'");
    }
    if (!(cfg.params.alpha > 0.0)) errors.push_back("params.alpha must be > 0");
    for (double a : cfg.params.alphas) {
        if (!(a > 0.0)) errors.push_back("params.alphas entries must be > 0");
    }
    if (!(cfg.params.mu0 > 0.0)) errors.push_back("params.mu0 must be > 0");
    if (cfg.params.mu_min < 0.0) errors.push_back("params.mu_min must be >= 0");
    if (cfg.params.mu_mode != "constant" && cfg.params.mu_mode != "harmonic" &&
        cfg.params.mu_mode != "player") {
        errors.push_back("params.mu_mode: expected constant|harmonic|player");
    }
    if (cfg.params.max_iters < 0) errors.push_back("params.max_iters must be >= 0");
    if (cfg.params.seeds.empty()) errors.push_back("params.seeds must be non-empty");
    if (cfg.params.record_every < 1) errors.push_back("params.record_every must be >= 1");
    if (cfg.params.stop_tol && !(*cfg.params.stop_tol > 0.0)) {
        errors.push_back("params.stop_tol must be > 0");
    }
    if (cfg.params.threads < 1) errors.push_back("params.threads must be >= 1");
    if (cfg.analysis.chi && !(*cfg.analysis.chi > 0.0)) errors.push_back("analysis.chi must be > 0");
    if (cfg.analysis.d_override && !(*cfg.analysis.d_override >= 0.0)) {
        errors.push_back("analysis.d_override must be >= 0");
    }
    if (!(cfg.analysis.mu_ref > 0.0)) errors.push_back("analysis.mu_ref must be > 0");
    if (!(cfg.analysis.tol > 0.0)) errors.push_back("analysis.tol must be > 0");
    if (cfg.analysis.lipschitz_samples < 2) {
        errors.push_back("analysis.lipschitz_samples must be >= 2");
    }
    if (cfg.analysis.chi_samples < 1) errors.push_back("analysis.chi_samples must be >= 1");
    if (!(cfg.analysis.gamma0 > 0.0)) errors.push_back("analysis.gamma0 must be > 0");
    if (cfg.analysis.alpha_grid < 2) errors.push_back("analysis.alpha_grid must be >= 2");
    if (cfg.output.directory.empty()) errors.push_back("output.directory must be non-empty");

    if (!errors.empty()) {
        std::string joined = "config validation failed:";
        for (const std::string& e : errors) joined += "\n  - " + e;
        throw ValidationError(joined);
    }
    if (cfg.params.alphas.empty()) cfg.params.alphas.push_back(cfg.params.alpha);
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(root);
}

inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json root;
    if (!cfg.game.benchmark.empty()) root["game"]["benchmark"] = cfg.game.benchmark;
    if (cfg.game.box) {
        root["game"]["box"] = {{"lower", cfg.game.box->lower}, {"upper", cfg.game.box->upper}};
    }
    if (!cfg.game.custom.empty()) {
        nlohmann::json coalitions = nlohmann::json::array();
        for (const auto& coalition : cfg.game.custom) {
            nlohmann::json members = nlohmann::json::array();
            for (const CustomPlayerConfig& p : coalition) {
                members.push_back({{"lower", p.box.lower},
                                   {"upper", p.box.upper},
                                   {"weight", p.cost.weight},
                                   {"center", p.cost.center},
                                   {"offset", p.cost.offset}});
            }
            coalitions.push_back(std::move(members));
        }
        root["game"]["custom"] = std::move(coalitions);
    }
    root["graph"]["kind"] = cfg.graph.kind;
    root["graph"]["self_weight"] = cfg.graph.self_weight;
    if (cfg.graph.matrix) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < cfg.graph.matrix->rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < cfg.graph.matrix->cols; ++c) row.push_back(cfg.graph.matrix->at(r, c));
            rows.push_back(std::move(row));
        }
        root["graph"]["matrix"] = std::move(rows);
    }
    root["params"]["alpha"] = cfg.params.alpha;
    root["params"]["alphas"] = cfg.params.alphas;
    root["params"]["mu0"] = cfg.params.mu0;
    root["params"]["mu_mode"] = cfg.params.mu_mode;
    root["params"]["mu_min"] = cfg.params.mu_min;
    root["params"]["max_iters"] = cfg.params.max_iters;
    root["params"]["seeds"] = cfg.params.seeds;
    root["params"]["record_every"] = cfg.params.record_every;
    if (cfg.params.stop_tol) root["params"]["stop_tol"] = *cfg.params.stop_tol;
    root["params"]["threads"] = cfg.params.threads;
    if (cfg.analysis.chi) root["analysis"]["chi"] = *cfg.analysis.chi;
    if (cfg.analysis.d_override) root["analysis"]["d_override"] = *cfg.analysis.d_override;
    root["analysis"]["mu_ref"] = cfg.analysis.mu_ref;
    root["analysis"]["tol"] = cfg.analysis.tol;
    root["analysis"]["lipschitz_samples"] = cfg.analysis.lipschitz_samples;
    root["analysis"]["chi_samples"] = cfg.analysis.chi_samples;
    root["analysis"]["gamma0"] = cfg.analysis.gamma0;
    root["analysis"]["alpha_grid"] = cfg.analysis.alpha_grid;
    root["analysis"]["analysis_seed"] = cfg.analysis.analysis_seed;
    root["output"]["directory"] = cfg.output.directory;
    root["output"]["formats"] = cfg.output.formats;
    return root;
}

inline void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path.string());
    out << to_json(cfg).dump(2) << "\n";
}

// Builds the per-coalition mixing graph named by the config.
inline CoalitionGraph build_graph(const GraphConfig& cfg, int size) {
    if (cfg.kind == "ring") return build_ring(size, cfg.self_weight);
    if (cfg.kind == "complete") return build_complete(size);
    if (cfg.kind == "matrix") {
        if (!cfg.matrix) throw ValidationError("graph.matrix missing");
        if (cfg.matrix->rows != size) {
            throw ValidationError("graph.matrix has size " + std::to_string(cfg.matrix->rows) +
                                  ", coalition needs " + std::to_string(size));
        }
        return make_graph(*cfg.matrix);
    }
    throw ValidationError("unknown graph.kind '" + cfg.kind + "'");
}

inline GameSpec build_game(const RunConfig& cfg) {
    if (cfg.game.benchmark == "cournot") {
        std::optional<CoalitionGraph> graph;
        // "matrix"/"complete"/non-default ring all flow through build_graph.
        graph = build_graph(cfg.graph, kCournotPlayers);
        return build_cournot(cfg.game.box.value_or(kCournotDefaultBox), graph);
    }
    std::vector<PlayerSpec> players;
    std::vector<CoalitionGraph> graphs;
    for (std::size_t i = 0; i < cfg.game.custom.size(); ++i) {
        const auto& coalition = cfg.game.custom[i];
        for (std::size_t j = 0; j < coalition.size(); ++j) {
            const CustomPlayerConfig& pc = coalition[j];
            PlayerSpec p;
            p.coalition = static_cast<int>(i);
            p.player = static_cast<int>(j);
            p.box = pc.box;
            const QuadraticCost cost = pc.cost;
            const int coalition_size = static_cast<int>(coalition.size());
            const int self = static_cast<int>(j);
            // Own-coordinate quadratic; global index resolved after assembly
            // via the block layout (coalitions are contiguous in config order).
            int offset = 0;
            for (std::size_t q = 0; q < i; ++q) offset += static_cast<int>(cfg.game.custom[q].size());
            const int global = offset + self;
            p.cost.evaluate = [cost, global](std::span<const double> x) {
                const double d = x[static_cast<std::size_t>(global)] - cost.center;
                return cost.weight * d * d + cost.offset;
            };
            p.subgradient = [cost, coalition_size, self, global](std::span<const double> x) {
                std::vector<double> g(static_cast<std::size_t>(coalition_size), 0.0);
                g[static_cast<std::size_t>(self)] =
                    2.0 * cost.weight * (x[static_cast<std::size_t>(global)] - cost.center);
                return g;
            };
            players.push_back(std::move(p));
        }
        graphs.push_back(build_graph(cfg.graph, static_cast<int>(coalition.size())));
    }
    return assemble_game(std::move(players), std::move(graphs));
}

inline AlgorithmParams to_params(const RunConfig& cfg) {
    AlgorithmParams params;
    params.alpha = cfg.params.alpha;
    params.mu.mu0 = cfg.params.mu0;
    params.mu.mode = mu_mode_from_string(cfg.params.mu_mode);
    params.mu.mu_min = cfg.params.mu_min;
    params.max_iters = cfg.params.max_iters;
    params.seed = cfg.params.seeds.front();
    params.record_every = cfg.params.record_every;
    params.stop_tol = cfg.params.stop_tol;
    params.threads = cfg.params.threads;
    return params;
}

}  // namespace nashseek
