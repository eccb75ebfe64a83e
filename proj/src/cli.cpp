#include "attnplan/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "attnplan/gridworld.hpp"
#include "attnplan/io.hpp"
#include "attnplan/rollout.hpp"
#include "attnplan/shift.hpp"

namespace attnplan {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
    std::string command;
    std::string config;
    int sustain_bound = 4;
    double w1 = 0.7;
    double tol = kDefaultTol;
    int max_iters = kDefaultMaxIters;
    std::uint64_t seed = 0;
    int rollouts = 10000;
    int horizon = 200;
    std::string out = ".";
    bool costs_zero = false;
    std::string accounting = "per-step";
    std::vector<double> w1_list{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
};

fs::path resolve_config(const std::string& arg) {
    fs::path direct(arg);
    if (fs::exists(direct) && fs::is_regular_file(direct)) return direct;
    std::vector<fs::path> roots;
    if (const char* env = std::getenv("ATTNPLAN_CONFIG_DIR")) roots.emplace_back(env);
#ifdef ATTNPLAN_CONFIG_DIR
    roots.emplace_back(ATTNPLAN_CONFIG_DIR);
#endif
    for (const fs::path& root : roots) {
        for (const fs::path candidate : {root / (arg + ".json"), root / arg})
            if (fs::exists(candidate) && fs::is_regular_file(candidate)) return candidate;
    }
    throw ParseError("config not found: " + arg);
}

InfoAccounting accounting_of(const Options& opt) {
    if (opt.accounting == "per-step") return InfoAccounting::PerStep;
    if (opt.accounting == "boundary") return InfoAccounting::BoundaryAdjusted;
    throw ValidationError("info accounting must be 'per-step' or 'boundary'");
}

std::array<double, 2> weights_of(double w1) {
    if (!(w1 > 0.0 && w1 < 1.0))
        throw ValidationError("w1 must lie strictly between 0 and 1");
    return {w1, 1.0 - w1};
}

struct Pipeline {
    CompiledWorld world;
    std::vector<AttentionalMdp> modes;
};

Pipeline prepare(const Options& opt) {
    GridworldSpec spec = load_spec_file(resolve_config(opt.config));
    if (opt.costs_zero) std::fill(spec.sensor_costs.begin(), spec.sensor_costs.end(), 0.0);
    Pipeline p{compile(spec), {}};
    for (const AttentionMode& mode : p.world.modes) {
        Disaggregation d = uniform_disaggregation(mode, p.world.mdp);
        p.modes.push_back(
            solve_mode(build_attentional_mdp(p.world.mdp, mode, d), opt.tol, opt.max_iters));
    }
    return p;
}

void write_manifest(const Options& opt, const std::vector<std::string>& outputs,
                    double wall_clock_seconds) {
    json manifest{{"version", kToolVersion},
                  {"command", opt.command},
                  {"parameters",
                   {{"config", opt.config},
                    {"T", opt.sustain_bound},
                    {"w1", opt.w1},
                    {"tol", opt.tol},
                    {"max_iters", opt.max_iters},
                    {"seed", opt.seed},
                    {"n", opt.rollouts},
                    {"horizon", opt.horizon},
                    {"costs_zero", opt.costs_zero},
                    {"info_accounting", opt.accounting},
                    {"w1_list", opt.w1_list}}},
                  {"outputs", outputs},
                  {"wall_clock_seconds", wall_clock_seconds}};
    write_file_atomic(fs::path(opt.out) / "manifest.json", manifest.dump(2) + "\n");
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int cmd_solve(const Options& opt) {
    Stopwatch clock;
    Pipeline p = prepare(opt);
    AttentionShiftMdp sm = build_shift_mdp(p.world.mdp, p.modes, opt.sustain_bound,
                                           accounting_of(opt));
    ShiftSolution sol = solve_shift(sm, weights_of(opt.w1), opt.tol, opt.max_iters);

    write_file_atomic(fs::path(opt.out) / "values.json",
                      solution_json(p.world.mdp, sol).dump(2) + "\n");
    write_file_atomic(fs::path(opt.out) / "policy.json",
                      policy_json(p.world.mdp, p.modes, sol).dump(2) + "\n");
    write_manifest(opt, {"values.json", "policy.json"}, clock.seconds());

    const int x0 = p.world.mdp.initial_state();
    std::printf("G(x0) = %.2f\n", sol.goal_value[x0]);
    std::printf("I(x0) = %.2f\n", sol.info_value[x0]);
    std::printf("V(x0) = %.2f\n", sol.value[x0]);
    return 0;
}

int cmd_sweep(const Options& opt) {
    Stopwatch clock;
    Pipeline p = prepare(opt);
    SustainBoundResult result = sustain_bound_search(p.world.mdp, p.modes, weights_of(opt.w1),
                                                     opt.sustain_bound, opt.tol, accounting_of(opt));
    write_file_atomic(fs::path(opt.out) / "sweep_T.csv",
                      sweep_csv(result.solutions, p.world.mdp.initial_state()));
    write_manifest(opt, {"sweep_T.csv"}, clock.seconds());
    std::printf("T* = %d (%s)\n", result.optimal_bound,
                result.certified ? "certified" : "bound not reached");
    return 0;
}

int cmd_pareto(const Options& opt) {
    Stopwatch clock;
    Pipeline p = prepare(opt);
    std::vector<std::array<double, 2>> weights;
    for (double w1 : opt.w1_list) weights.push_back(weights_of(w1));
    std::vector<ParetoPoint> points = pareto_sweep(p.world.mdp, p.modes, opt.sustain_bound,
                                                   weights, opt.tol, accounting_of(opt));
    write_file_atomic(fs::path(opt.out) / "pareto.csv", pareto_csv(points));
    write_manifest(opt, {"pareto.csv"}, clock.seconds());
    std::printf("%zu pareto points written\n", points.size());
    return 0;
}

int cmd_simulate(const Options& opt) {
    Stopwatch clock;
    Pipeline p = prepare(opt);
    const InfoAccounting accounting = accounting_of(opt);
    AttentionShiftMdp sm = build_shift_mdp(p.world.mdp, p.modes, opt.sustain_bound, accounting);
    ShiftSolution sol = solve_shift(sm, weights_of(opt.w1), opt.tol, opt.max_iters);

    PursuitSampler sampler(p.world);
    TrajectoryLog log = rollout(sampler, p.modes, sol, opt.horizon, opt.seed, 0, accounting);
    ReturnsReport report = estimate_returns(sampler, p.modes, sol, opt.rollouts, opt.horizon,
                                            opt.seed, accounting);

    write_file_atomic(fs::path(opt.out) / "timeline.csv", timeline_csv(log));
    write_file_atomic(fs::path(opt.out) / "returns.json", returns_json(report).dump(2) + "\n");
    write_manifest(opt, {"timeline.csv", "returns.json"}, clock.seconds());

    const int x0 = p.world.mdp.initial_state();
    std::printf("G_hat = %.2f (ci %.2f), solver G = %.2f\n", report.goal.mean, report.goal.ci,
                sol.goal_value[x0]);
    std::printf("I_hat = %.2f (ci %.2f), solver I = %.2f\n", report.info.mean, report.info.ci,
                sol.info_value[x0]);
    return 0;
}

int cmd_replay(const std::string& manifest_path, const std::string& out) {
    std::ifstream in(manifest_path);
    if (!in) throw ParseError("cannot open manifest " + manifest_path);
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid manifest: ") + e.what());
    }
    Options opt;
    try {
        opt.command = manifest.at("command").get<std::string>();
        const json& p = manifest.at("parameters");
        opt.config = p.at("config").get<std::string>();
        opt.sustain_bound = p.at("T").get<int>();
        opt.w1 = p.at("w1").get<double>();
        opt.tol = p.at("tol").get<double>();
        opt.max_iters = p.at("max_iters").get<int>();
        opt.seed = p.at("seed").get<std::uint64_t>();
        opt.rollouts = p.at("n").get<int>();
        opt.horizon = p.at("horizon").get<int>();
        opt.costs_zero = p.at("costs_zero").get<bool>();
        opt.accounting = p.at("info_accounting").get<std::string>();
        opt.w1_list = p.at("w1_list").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest missing fields: ") + e.what());
    }
    opt.out = out;
    if (opt.command == "solve") return cmd_solve(opt);
    if (opt.command == "sweep-t") return cmd_sweep(opt);
    if (opt.command == "pareto") return cmd_pareto(opt);
    if (opt.command == "simulate") return cmd_simulate(opt);
    throw ValidationError("manifest names unknown command '" + opt.command + "'");
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Attention-shift planning toolkit for factored pursuit MDPs"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Options opt;
    std::string manifest_path;

    auto add_common = [&](CLI::App* cmd, bool with_sim_flags) {
        cmd->add_option("--config", opt.config, "Config file path or bundled config name")
            ->required();
        cmd->add_option("--T", opt.sustain_bound, "Sustain-duration bound")->check(CLI::PositiveNumber);
        cmd->add_option("--tol", opt.tol, "Solver tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iters", opt.max_iters, "Solver sweep cap")->check(CLI::PositiveNumber);
        cmd->add_option("--out", opt.out, "Output directory");
        cmd->add_flag("--costs-zero", opt.costs_zero, "Zero out all sensor costs");
        cmd->add_option("--info-accounting", opt.accounting,
                        "Sensor-saving accounting: per-step or boundary");
        if (with_sim_flags) {
            cmd->add_option("--seed", opt.seed, "Master seed");
            cmd->add_option("--n", opt.rollouts, "Number of rollouts")->check(CLI::PositiveNumber);
            cmd->add_option("--horizon", opt.horizon, "Rollout horizon")->check(CLI::PositiveNumber);
        }
    };

    CLI::App* solve = app.add_subcommand("solve", "Solve the weighted attention-shift problem");
    add_common(solve, false);
    solve->add_option("--w1", opt.w1, "Weight of the task objective");

    CLI::App* sweep = app.add_subcommand("sweep-t", "Grow the sustain bound and record the trend");
    add_common(sweep, false);
    sweep->add_option("--w1", opt.w1, "Weight of the task objective");

    CLI::App* pareto = app.add_subcommand("pareto", "Sweep objective weights at a fixed bound");
    add_common(pareto, false);
    pareto->add_option("--w1-list", opt.w1_list, "Task-objective weights to sweep")
        ->delimiter(',');

    CLI::App* simulate = app.add_subcommand("simulate", "Roll out the solved policy");
    add_common(simulate, true);
    simulate->add_option("--w1", opt.w1, "Weight of the task objective");

    CLI::App* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("--manifest", manifest_path, "Path to manifest.json")->required();
    replay->add_option("--out", opt.out, "Output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (solve->parsed()) {
            opt.command = "solve";
            return cmd_solve(opt);
        }
        if (sweep->parsed()) {
            opt.command = "sweep-t";
            return cmd_sweep(opt);
        }
        if (pareto->parsed()) {
            opt.command = "pareto";
            return cmd_pareto(opt);
        }
        if (simulate->parsed()) {
            opt.command = "simulate";
            return cmd_simulate(opt);
        }
        if (replay->parsed()) return cmd_replay(manifest_path, opt.out);
        return 1;
    } catch (const NonConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const StateSpaceTooLarge& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace attnplan
