#pragma once

#include "tvnav/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace tvnav {

/// Accepts a path, a path without its .json suffix, or the bare name of a
/// bundled scenario.
inline std::filesystem::path resolve_config(const std::string& arg) {
    namespace fs = std::filesystem;
    if (fs::exists(arg)) return arg;
    if (fs::exists(arg + ".json")) return arg + ".json";
    const fs::path local = fs::path("scenarios") / (arg + ".json");
    if (fs::exists(local)) return local;
#ifdef TVNAV_SCENARIO_DIR
    const fs::path bundled = fs::path(TVNAV_SCENARIO_DIR) / (arg + ".json");
    if (fs::exists(bundled)) return bundled;
#endif
    throw ConfigError("config: cannot find '" + arg + "'");
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (begin <= csv.size()) {
        const std::size_t comma = csv.find(',', begin);
        const std::string item =
            csv.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    return out;
}

inline std::vector<PlannerKind> parse_planner_list(const std::string& csv) {
    std::vector<PlannerKind> out;
    for (const std::string& name : split_list(csv)) out.push_back(parse_planner(name));
    if (out.empty()) throw ConfigError("planner list is empty");
    return out;
}

inline std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    for (const std::string& item : split_list(csv)) out.push_back(parse_double(item));
    return out;
}

inline std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (const double v : parse_double_list(csv)) {
        const int n = static_cast<int>(std::lround(v));
        if (std::abs(v - n) > 1e-9) throw ConfigError("expected an integer list");
        out.push_back(n);
    }
    return out;
}

struct CommonFlags {
    std::string config;
    std::vector<std::string> overrides;
    std::int64_t seed = -1;
    std::string planner;

    Scenario load() const {
        Scenario sc = load_scenario(resolve_config(config), overrides);
        if (seed >= 0) sc.seed = static_cast<std::uint64_t>(seed);
        if (!planner.empty()) sc.planner_kind = parse_planner(planner);
        return sc;
    }
};

inline void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "Scenario file or bundled scenario name")
        ->required();
    cmd->add_option("--set", flags.overrides, "Override a config key, e.g. planner.alpha=0.99");
    cmd->add_option("--seed", flags.seed, "Episode seed (overrides episode.seed)");
    cmd->add_option("--planner", flags.planner, "Planner: ours, fhvi, ersi, or pi");
}

}  // namespace detail

/// Entry point behind the `tvnav` binary; callable in-process for tests.
/// Returns 0 only when the requested output was fully produced.
inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Reachability-guided navigation planner and simulation harness"};
    app.require_subcommand(1);

    detail::CommonFlags plan_flags;
    CLI::App* plan_cmd = app.add_subcommand("plan", "Compute one policy and print its first action");
    detail::add_common(plan_cmd, plan_flags);
    std::string plan_out;
    plan_cmd->add_option("--out", plan_out, "Also write the summary line to this file");

    detail::CommonFlags sim_flags;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Run one episode and write the trajectory");
    detail::add_common(sim_cmd, sim_flags);
    std::string sim_out;
    bool sim_plan_times = false;
    sim_cmd->add_option("--out", sim_out, "Trajectory file to write")->required();
    sim_cmd->add_flag("--plan-times", sim_plan_times,
                      "Include the plan wall-clock column (files stop being byte-reproducible)");

    detail::CommonFlags campaign_flags;
    CLI::App* campaign_cmd =
        app.add_subcommand("campaign", "Run seeded trials across agent counts and planners");
    detail::add_common(campaign_cmd, campaign_flags);
    std::string campaign_out;
    std::string campaign_agents;
    std::string campaign_planners = "ours";
    int campaign_trials = 10;
    campaign_cmd->add_option("--out", campaign_out, "Metrics file to write")->required();
    campaign_cmd->add_option("--agents", campaign_agents,
                             "Agent counts, e.g. 5,6,7,8 (default: the scenario's count)");
    campaign_cmd->add_option("--planners", campaign_planners, "Planner list, e.g. ours,fhvi");
    campaign_cmd->add_option("--trials", campaign_trials, "Trials per cell")->check(CLI::PositiveNumber);

    CLI::App* bench_cmd = app.add_subcommand("bench", "Time single plan solves across a sweep");
    std::string bench_sweep;
    std::string bench_values;
    std::string bench_planners = "ours,fhvi,ersi,pi";
    std::string bench_out;
    BenchOptions bench_opt;
    bench_cmd->add_option("--sweep", bench_sweep, "resolution, range, or horizon")->required();
    bench_cmd->add_option("--values", bench_values,
                          "Sweep values (default: resolution 4,2,1; range 10,20,30,40; horizon 4,5,6)");
    bench_cmd->add_option("--planners", bench_planners, "Planner list");
    bench_cmd->add_option("--out", bench_out, "Timing file to write")->required();
    bench_cmd->add_option("--cap-s", bench_opt.entry_time_cap_s, "Per-entry time cap in seconds");
    bench_cmd->add_option("--range-m", bench_opt.range_m, "Fixed range for resolution/horizon sweeps");
    bench_cmd->add_option("--cell-m", bench_opt.cell_m, "Fixed cell size for range/horizon sweeps");
    bench_cmd->add_option("--horizon", bench_opt.horizon, "Fixed horizon for resolution/range sweeps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*plan_cmd) {
            const Scenario sc = plan_flags.load();
            const Grid grid = sc.make_grid();
            const ActionSpace actions = sc.make_actions();
            const Cell start = grid.discretize(sc.robot_start);
            const Cell goal = grid.discretize(sc.robot_goal);
            std::vector<AgentState> agents;
            for (const AgentSpec& spec : sc.agents) {
                agents.push_back(AgentState{spec.start, Vec2::Zero(), spec.goal});
            }
            const TimeAxis axis{0.0, sc.planner.dt, sc.planner.horizon};
            const PredictionResult prediction = predict_other_vehicles(
                agents, make_belief(sc.robot_start, Mat2::Zero()), sc.sfm_belief, axis, sc.field,
                sc.noise, sc.planner.alpha, grid, sc.obstacles, sc.planner.ut);
            const RewardModel reward(grid, goal, prediction, sc.reward);
            const PlanContext ctx{grid, actions, sc.field, sc.noise, sc.obstacles, reward};
            const auto wall0 = std::chrono::steady_clock::now();
            const TimedPolicy policy = detail::plan_with(sc.planner_kind, start, 0.0, ctx,
                                                         sc.planner, sc.ersi_sequence_cap);
            const double plan_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
            int action = policy.action_at(0, grid.linear(start));
            if (action < 0) action = actions.nearest(Vec2::Zero());
            const Vec2 u = actions.value(action);
            const std::string summary =
                std::string("planner=") + planner_name(sc.planner_kind) + " start_cell=(" +
                std::to_string(start.x) + "," + std::to_string(start.y) + ") action=(" +
                format_double(u.x()) + "," + format_double(u.y()) +
                ") value=" + format_double(policy.value_at(0, grid.linear(start))) +
                " plan_s=" + format_double(plan_s);
            std::cout << summary << "\n";
            if (!plan_out.empty()) {
                std::ofstream out = detail::open_out(plan_out);
                out << summary << "\n";
                detail::finish_out(out, plan_out);
            }
        } else if (*sim_cmd) {
            const Scenario sc = sim_flags.load();
            const EpisodeResult result = run_episode(sc);
            write_trajectory(result, sim_out, sim_plan_times);
            std::cout << "wrote " << sim_out << ": reached=" << (result.reached_goal ? 1 : 0)
                      << " steps=" << result.steps.size() - 1
                      << " distance_m=" << format_double(result.distance_traveled)
                      << " stops=" << result.emergency_stops << "\n";
        } else if (*campaign_cmd) {
            const Scenario sc = campaign_flags.load();
            const std::vector<int> counts = campaign_agents.empty()
                                                ? std::vector<int>{static_cast<int>(sc.agents.size())}
                                                : detail::parse_int_list(campaign_agents);
            const std::vector<PlannerKind> planners = detail::parse_planner_list(campaign_planners);
            const auto rows = metrics_campaign(sc, counts, campaign_trials, planners);
            write_metrics(rows, campaign_out);
            std::cout << "wrote " << campaign_out << ": " << rows.size() << " rows\n";
        } else if (*bench_cmd) {
            const SweepKind sweep = parse_sweep(bench_sweep);
            std::vector<double> values = detail::parse_double_list(bench_values);
            if (values.empty()) {
                switch (sweep) {
                    case SweepKind::Resolution: values = {4.0, 2.0, 1.0}; break;
                    case SweepKind::Range: values = {10.0, 20.0, 30.0, 40.0}; break;
                    case SweepKind::Horizon: values = {4.0, 5.0, 6.0}; break;
                }
            }
            const std::vector<PlannerKind> planners = detail::parse_planner_list(bench_planners);
            const TimingTable table = timing_benchmark(sweep, values, planners, bench_opt);
            write_timing(table, bench_out);
            std::cout << "wrote " << bench_out << ": " << table.entries.size() << " entries\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

inline int cli_main(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("tvnav");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tvnav
