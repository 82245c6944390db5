// Command-line front end: builds environments, solves Q tables, samples
// demonstrations, fits value functions, and evaluates recovered policies.
// Every command writes a run manifest next to its artifact; identical
// (command, config, seed) inputs reproduce byte-identical numeric artifacts.

#include "riskrl/environments.hpp"
#include "riskrl/errors.hpp"
#include "riskrl/evaluation.hpp"
#include "riskrl/forward.hpp"
#include "riskrl/inverse.hpp"
#include "riskrl/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;
using namespace riskrl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("RISKRL_SEED")) return std::strtoull(env, nullptr, 10);
    return 1;
}

class Manifest {
public:
    Manifest(std::string command, std::uint64_t seed) : start_(clock_t::now()) {
        j_["command"] = std::move(command);
        j_["seeds"] = {seed};
    }
    void config(const json& cfg) { j_["config"] = cfg; }
    void input(const std::string& name, const std::string& path) {
        j_["inputs"][name] = {{"path", path}, {"checksum", file_checksum(path)}};
    }
    void diagnostics(const SolveDiagnostics& d) {
        j_["solver"] = {{"iterations", d.iterations},
                        {"final_alpha", d.final_alpha},
                        {"residual", d.residual},
                        {"bellman_residual", d.bellman_residual},
                        {"radius", std::isfinite(d.radius) ? json(d.radius) : json("unbounded")},
                        {"clip_events", d.clip_events},
                        {"shrink_events", d.shrink_events}};
    }
    void note(const std::string& key, const json& value) { j_[key] = value; }
    void finish(const std::string& artifact_path) {
        j_["outputs"][ "artifact"] =
            json{{"path", artifact_path}, {"checksum", file_checksum(artifact_path)}};
        j_["wall_time_s"] =
            std::chrono::duration<double>(clock_t::now() - start_).count();
        write_file(artifact_path + ".manifest.json", j_.dump(2) + "\n");
    }

private:
    using clock_t = std::chrono::steady_clock;
    clock_t::time_point start_;
    json j_;
};

// env checksum recorded when the artifact was produced, if a manifest exists
std::string recorded_env_checksum(const std::string& artifact_path) {
    std::ifstream in(artifact_path + ".manifest.json");
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) return {};
    if (j.contains("inputs") && j["inputs"].contains("env"))
        return j["inputs"]["env"].value("checksum", std::string{});
    return {};
}

SolverConfig solver_from_flags(double tol, double alpha0, long max_iters) {
    SolverConfig cfg;
    cfg.tol = tol;
    cfg.alpha0 = alpha0;
    cfg.max_iters = max_iters;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"risk-sensitive reinforcement learning and inverse RL on finite MDPs"};
    app.require_subcommand(1);

    std::uint64_t seed = default_seed();
    app.add_option("--seed", seed, "global seed override (default: RISKRL_SEED or 1)");

    // ---- env ----
    auto* env = app.add_subcommand("env", "build an environment MDP file");
    env->require_subcommand(1);

    auto* grid = env->add_subcommand("gridworld", "build the grid world from a map file");
    std::string grid_map, grid_out;
    double grid_gamma = 0.95;
    std::string grid_absorbing_mode = "entry";
    grid->add_option("--map", grid_map, "map file (legend S G B g .)")->required();
    grid->add_option("--gamma", grid_gamma, "discount factor");
    grid->add_option("--absorbing-reward-mode", grid_absorbing_mode, "entry|recurring");
    grid->add_option("--out", grid_out, "output MDP file")->required();

    auto* ride = env->add_subcommand("rideshare", "build the ride-sharing MDP");
    std::string ride_cfg_path, ride_surge, ride_matrix, ride_out, ride_matrix_out;
    ride->add_option("--config", ride_cfg_path, "rideshare config json")->required();
    ride->add_option("--surge", ride_surge, "surge csv (timestamp,multiplier)");
    ride->add_option("--price-matrix", ride_matrix, "precomputed 4x4 matrix json");
    ride->add_option("--out", ride_out, "output MDP file")->required();
    ride->add_option("--matrix-out", ride_matrix_out, "also write the ingested matrix");

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "solve the risk-sensitive fixed point");
    std::string solve_env, solve_vf, solve_out;
    double solve_tol = 1e-8, solve_alpha0 = 0.0;
    long solve_max_iters = 100000;
    bool solve_strict_k = false;
    solve->add_option("--env", solve_env)->required();
    solve->add_option("--vf", solve_vf, "value-function spec json")->required();
    solve->add_option("--tol", solve_tol);
    solve->add_option("--alpha0", solve_alpha0);
    solve->add_option("--max-iters", solve_max_iters);
    solve->add_flag("--strict-k", solve_strict_k,
                    "fail unless an admissible ball radius exists");
    solve->add_option("--out", solve_out)->required();

    // ---- demos ----
    auto* demos_cmd = app.add_subcommand("demos", "sample demonstrations from a solved agent");
    std::string demos_env, demos_q, demos_out;
    double demos_beta = 4.0;
    int demos_episodes = 1000, demos_max_steps = 200, demos_start = -1;
    demos_cmd->add_option("--env", demos_env)->required();
    demos_cmd->add_option("--q", demos_q, "solved q table json")->required();
    demos_cmd->add_option("--beta", demos_beta);
    demos_cmd->add_option("--episodes", demos_episodes);
    demos_cmd->add_option("--max-steps", demos_max_steps);
    demos_cmd->add_option("--start", demos_start, "start state (-1: map start/uniform)");
    demos_cmd->add_option("--out", demos_out)->required();

    // ---- irl ----
    auto* irl = app.add_subcommand("irl", "fit a value function to demonstrations");
    std::string irl_env, irl_demos, irl_family = "lprospect", irl_loss = "nll", irl_out;
    int irl_restarts = 5, irl_max_outer = 100;
    double irl_beta = 4.0, irl_tol = 1e-8;
    irl->add_option("--env", irl_env)->required();
    irl->add_option("--demos", irl_demos)->required();
    irl->add_option("--family", irl_family, "prospect|linear|entropic|lprospect");
    irl->add_option("--restarts", irl_restarts);
    irl->add_option("--loss", irl_loss, "nll|kl");
    irl->add_option("--beta", irl_beta);
    irl->add_option("--max-outer", irl_max_outer);
    irl->add_option("--solver-tol", irl_tol);
    irl->add_option("--out", irl_out)->required();

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "compare true and learned policies");
    std::string eval_env, eval_true_vf, eval_learned_vf, eval_out;
    double eval_beta = 4.0, eval_tol = 1e-8;
    eval_cmd->add_option("--env", eval_env)->required();
    eval_cmd->add_option("--true-vf", eval_true_vf)->required();
    eval_cmd->add_option("--learned-vf", eval_learned_vf)->required();
    eval_cmd->add_option("--beta", eval_beta);
    eval_cmd->add_option("--solver-tol", eval_tol);
    eval_cmd->add_option("--out", eval_out, "per-state TV csv")->required();

    // ---- sweep ----
    auto* sweep_cmd = app.add_subcommand("sweep", "sample-complexity experiment");
    std::string sweep_env, sweep_true_vf, sweep_sizes = "10,30,100,300,1000,3000", sweep_out;
    std::string sweep_family = "entropic";
    int sweep_datasets = 5, sweep_restarts = 5, sweep_threads = 0, sweep_start = -1;
    double sweep_beta = 4.0;
    sweep_cmd->add_option("--env", sweep_env)->required();
    sweep_cmd->add_option("--true-vf", sweep_true_vf)->required();
    sweep_cmd->add_option("--sizes", sweep_sizes, "comma-separated dataset sizes");
    sweep_cmd->add_option("--family", sweep_family, "fitted family");
    sweep_cmd->add_option("--datasets", sweep_datasets);
    sweep_cmd->add_option("--restarts", sweep_restarts);
    sweep_cmd->add_option("--threads", sweep_threads);
    sweep_cmd->add_option("--start", sweep_start);
    sweep_cmd->add_option("--beta", sweep_beta);
    sweep_cmd->add_option("--out", sweep_out, "sweep csv (summary json written alongside)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (grid->parsed()) {
            Manifest man("env gridworld", seed);
            GridSpec spec = load_grid_map_file(grid_map);
            spec.gamma = grid_gamma;
            if (grid_absorbing_mode == "recurring")
                spec.absorbing_reward_mode = GridSpec::AbsorbingRewardMode::Recurring;
            else if (grid_absorbing_mode != "entry")
                throw ConfigError("absorbing-reward-mode must be entry or recurring");
            man.config(json{{"map", grid_map},
                            {"gamma", grid_gamma},
                            {"absorbing_reward_mode", grid_absorbing_mode}});
            man.input("map", grid_map);
            FiniteMDP mdp = build_gridworld(spec);
            man.note("start_state", spec.start_state());
            write_file(grid_out, mdp_to_json(mdp));
            man.finish(grid_out);
        } else if (ride->parsed()) {
            Manifest man("env rideshare", seed);
            RideshareConfig cfg = rideshare_config_from_json(read_file(ride_cfg_path));
            man.config(json::parse(rideshare_config_to_json(cfg)));
            man.input("config", ride_cfg_path);
            std::array<std::array<double, 4>, 4> matrix{};
            if (!ride_surge.empty()) {
                std::ifstream in(ride_surge);
                if (!in) throw ConfigError("cannot open surge csv: " + ride_surge);
                matrix = ingest_surge_csv(read_surge_csv(in));
                man.input("surge", ride_surge);
            } else if (!ride_matrix.empty()) {
                matrix = price_matrix_from_json(read_file(ride_matrix));
                man.input("price_matrix", ride_matrix);
            } else {
                throw ConfigError("rideshare: provide --surge or --price-matrix");
            }
            if (!ride_matrix_out.empty()) {
                write_file(ride_matrix_out, price_matrix_to_json(matrix));
                man.note("matrix_out", ride_matrix_out);
            }
            FiniteMDP mdp = build_rideshare(cfg, matrix);
            write_file(ride_out, mdp_to_json(mdp));
            man.finish(ride_out);
        } else if (solve->parsed()) {
            Manifest man("solve", seed);
            FiniteMDP mdp = mdp_from_json(read_file(solve_env));
            ValueFnSpec spec = spec_from_json(read_file(solve_vf));
            man.input("env", solve_env);
            man.input("vf", solve_vf);
            SolverConfig cfg = solver_from_flags(solve_tol, solve_alpha0, solve_max_iters);
            if (solve_strict_k)
                cfg.radius = find_admissible_K(spec, mdp.reward_bound(), mdp.gamma);
            man.config(json{{"tol", solve_tol},
                            {"alpha0", solve_alpha0},
                            {"max_iters", solve_max_iters},
                            {"strict_k", solve_strict_k}});
            SolveDiagnostics diag;
            QTable q = solve_q_fixed_point(mdp, spec, cfg, &diag);
            man.diagnostics(diag);
            write_file(solve_out, qtable_to_json(q));
            man.finish(solve_out);
        } else if (demos_cmd->parsed()) {
            Manifest man("demos", seed);
            FiniteMDP mdp = mdp_from_json(read_file(demos_env));
            QTable q = qtable_from_json(read_file(demos_q));
            man.input("env", demos_env);
            man.input("q", demos_q);
            man.config(json{{"beta", demos_beta},
                            {"episodes", demos_episodes},
                            {"max_steps", demos_max_steps},
                            {"start", demos_start}});
            Policy pi = boltzmann_policy(mdp, q, demos_beta);
            std::vector<double> start_dist(mdp.n_states, 0.0);
            if (demos_start >= 0) start_dist[demos_start] = 1.0;
            else start_dist = uniform_start_dist(mdp);
            DemonstrationSet demos = sample_demonstrations(mdp, pi, demos_episodes, start_dist,
                                                           demos_max_steps, seed);
            std::ostringstream out;
            demos_to_jsonl(demos, out);
            write_file(demos_out, out.str());
            man.finish(demos_out);
        } else if (irl->parsed()) {
            Manifest man("irl", seed);
            FiniteMDP mdp = mdp_from_json(read_file(irl_env));
            std::ifstream din(irl_demos);
            if (!din) throw ConfigError("cannot open demos file: " + irl_demos);
            DemonstrationSet demos = demos_from_jsonl(din, mdp.n_states, mdp.n_actions);
            man.input("env", irl_env);
            man.input("demos", irl_demos);
            IRLConfig cfg;
            cfg.restarts = irl_restarts;
            cfg.beta = irl_beta;
            cfg.max_outer_iters = irl_max_outer;
            cfg.solver.tol = irl_tol;
            if (irl_loss == "kl") cfg.loss = LossKind::KL;
            else if (irl_loss != "nll") throw ConfigError("loss must be nll or kl");
            man.config(json{{"family", irl_family},
                            {"restarts", irl_restarts},
                            {"loss", irl_loss},
                            {"beta", irl_beta},
                            {"max_outer", irl_max_outer},
                            {"solver_tol", irl_tol}});
            IRLResult result = irl_fit(mdp, demos, family_from_name(irl_family), cfg, seed);
            write_file(irl_out, irl_result_to_json(result));
            man.finish(irl_out);
        } else if (eval_cmd->parsed()) {
            Manifest man("eval", seed);
            FiniteMDP mdp = mdp_from_json(read_file(eval_env));
            std::string env_sum = file_checksum(eval_env);
            for (const std::string& p : {eval_true_vf, eval_learned_vf}) {
                std::string recorded = recorded_env_checksum(p);
                if (!recorded.empty() && recorded != env_sum)
                    throw ConfigError("artifact " + p + " was produced against a different env");
            }
            ValueFnSpec true_spec = spec_from_json(read_file(eval_true_vf));
            ValueFnSpec learned_spec = spec_from_json(read_file(eval_learned_vf));
            man.input("env", eval_env);
            man.input("true_vf", eval_true_vf);
            man.input("learned_vf", eval_learned_vf);
            man.config(json{{"beta", eval_beta}, {"solver_tol", eval_tol}});
            SolverConfig scfg = solver_from_flags(eval_tol, 0.0, 100000);
            Policy pi_true = boltzmann_policy(mdp, solve_q_fixed_point(mdp, true_spec, scfg), eval_beta);
            Policy pi_learned =
                boltzmann_policy(mdp, solve_q_fixed_point(mdp, learned_spec, scfg), eval_beta);
            TVReport rep = policy_tv_report(mdp, pi_true, pi_learned);
            man.note("mean_tv", rep.mean);
            man.note("variance_tv", rep.variance);
            write_file(eval_out, tv_report_to_csv(rep));
            man.finish(eval_out);
        } else if (sweep_cmd->parsed()) {
            Manifest man("sweep", seed);
            FiniteMDP mdp = mdp_from_json(read_file(sweep_env));
            ValueFnSpec true_spec = spec_from_json(read_file(sweep_true_vf));
            man.input("env", sweep_env);
            man.input("true_vf", sweep_true_vf);
            std::vector<long> sizes;
            std::stringstream ss(sweep_sizes);
            for (std::string tok; std::getline(ss, tok, ',');) sizes.push_back(std::stol(tok));
            SweepConfig cfg;
            cfg.datasets_per_size = sweep_datasets;
            cfg.irl.restarts = sweep_restarts;
            cfg.irl.beta = sweep_beta;
            cfg.threads = sweep_threads;
            cfg.start_state = sweep_start;
            man.config(json{{"sizes", sizes},
                            {"family", sweep_family},
                            {"datasets", sweep_datasets},
                            {"restarts", sweep_restarts},
                            {"beta", sweep_beta}});
            cfg.fit_family = family_from_name(sweep_family);
            SweepResult result = sample_complexity_experiment(mdp, true_spec, sizes, cfg, seed);
            man.note("fit_a", result.fit_a);
            man.note("fit_b", result.fit_b);
            write_file(sweep_out, sweep_to_csv(result));
            write_file(sweep_out + ".summary.json", sweep_summary_to_json(result));
            man.finish(sweep_out);
        }
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const MathError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
