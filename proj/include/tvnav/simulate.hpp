#pragma once

#include "tvnav/scenario.hpp"

#include <chrono>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tvnav {

struct TrajectoryRecord {
    int step = 0;
    double time_s = 0.0;
    Vec2 robot = Vec2::Zero();
    /// Executed velocity command; zero on the initial row and on stop rows.
    Vec2 action = Vec2::Zero();
    bool stopped = false;
    std::vector<Vec2> agents;
    /// Wall clock of the replan that preceded this step, 0 elsewhere.
    double plan_seconds = 0.0;
};

struct EpisodeResult {
    bool reached_goal = false;
    double distance_traveled = 0.0;
    /// Simulated seconds until arrival, or until the step cap.
    double time_to_goal = 0.0;
    int emergency_stops = 0;
    int stops_from_agents = 0;
    int stops_from_obstacles = 0;
    /// steps[0] is the initial state; one more row per executed step.
    std::vector<TrajectoryRecord> steps;
    std::vector<double> plan_seconds;
};

/// True when moving to `proposed` would collide: inside an obstacle box, or
/// strictly closer than `radius` to any agent (distance exactly `radius` is
/// allowed).
inline bool emergency_stop_check(const Vec2& proposed, std::span<const Box> obstacles,
                                 std::span<const AgentState> agents, double radius) {
    for (const Box& box : obstacles) {
        if (box.contains(proposed)) return true;
    }
    for (const AgentState& agent : agents) {
        if ((proposed - agent.position).norm() < radius) return true;
    }
    return false;
}

namespace detail {

/// Uniform point in the workspace outside every obstacle. Falls back to the
/// workspace center if rejection sampling keeps failing (fully blocked map).
inline Vec2 random_free_point(const Box& bounds, std::span<const Box> obstacles, Rng& rng) {
    for (int tries = 0; tries < 200; ++tries) {
        const Vec2 p(rng.uniform(bounds.lo.x(), bounds.hi.x()),
                     rng.uniform(bounds.lo.y(), bounds.hi.y()));
        bool free = true;
        for (const Box& box : obstacles) {
            if (box.contains(p)) {
                free = false;
                break;
            }
        }
        if (free) return p;
    }
    return 0.5 * (bounds.lo + bounds.hi);
}

inline TimedPolicy plan_with(PlannerKind kind, const Cell& start, double t0,
                             const PlanContext& ctx, const PlannerConfig& cfg,
                             std::uint64_t ersi_cap) {
    switch (kind) {
        case PlannerKind::Ours: return policy_search(start, t0, ctx, cfg);
        case PlannerKind::Fhvi: return fhvi(t0, ctx, cfg);
        case PlannerKind::Ersi: return ersi(start, t0, ctx, cfg, ersi_cap);
        case PlannerKind::Pi: return pi_reachable(start, t0, ctx, cfg);
    }
    throw ConfigError("planner: unknown kind");
}

}  // namespace detail

/// Receding-horizon episode: plan over the horizon, execute the planned
/// actions step by step while the agents move, then replan, until the robot's
/// cell is the goal cell or the step cap runs out.
///
/// The emergency stop vetoes any step whose landing point (noise included)
/// would penetrate an obstacle or come within the collision radius of an
/// agent's current position; the robot then holds still for that step.
///
/// Simulated time never advances while a planner runs. The budget in
/// PlannerConfig binds only the planners that honor it (ours and pi); fhvi
/// and ersi always run to completion, which realizes the paused-world
/// treatment the baselines get.
inline EpisodeResult run_episode(const Scenario& sc) {
    sc.validate();
    const Grid grid = sc.make_grid();
    const ActionSpace actions = sc.make_actions();
    const PlannerConfig& cfg = sc.planner;
    const Cell goal = grid.discretize(sc.robot_goal);
    const double radius = sc.stop_radius();
    const Box bounds = grid.bounds();
    const double dt = cfg.dt;

    Rng rng(sc.seed);
    Vec2 robot = sc.robot_start;
    std::vector<AgentState> agents;
    agents.reserve(sc.agents.size());
    for (const AgentSpec& spec : sc.agents) {
        agents.push_back(AgentState{spec.start, Vec2::Zero(), spec.goal});
    }

    EpisodeResult out;
    auto snapshot = [&](int step, double time, const Vec2& action, bool stop, double plan_s) {
        TrajectoryRecord rec{step, time, robot, action, stop, {}, plan_s};
        rec.agents.reserve(agents.size());
        for (const AgentState& a : agents) rec.agents.push_back(a.position);
        out.steps.push_back(std::move(rec));
    };
    snapshot(0, 0.0, Vec2::Zero(), false, 0.0);

    if (grid.discretize(robot) == goal) {
        out.reached_goal = true;
        return out;
    }

    double t = 0.0;
    int executed = 0;
    while (executed < sc.step_cap) {
        const Cell start_cell = grid.discretize(robot);
        const TimeAxis axis{t, dt, cfg.horizon};
        const PredictionResult prediction =
            predict_other_vehicles(agents, make_belief(robot, Mat2::Zero()), sc.sfm_belief, axis,
                                   sc.field, sc.noise, cfg.alpha, grid, sc.obstacles, cfg.ut);
        const RewardModel reward(grid, goal, prediction, sc.reward);
        const PlanContext ctx{grid, actions, sc.field, sc.noise, sc.obstacles, reward};

        const auto wall0 = std::chrono::steady_clock::now();
        const TimedPolicy policy =
            detail::plan_with(sc.planner_kind, start_cell, t, ctx, cfg, sc.ersi_sequence_cap);
        const double plan_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
        out.plan_seconds.push_back(plan_s);

        for (int k = 0; k < cfg.horizon && executed < sc.step_cap; ++k) {
            const Cell cell = grid.discretize(robot);
            int action_index = policy.action_at(k, grid.linear(cell));
            if (action_index < 0) action_index = actions.nearest(Vec2::Zero());
            const Vec2 u = actions.value(action_index);

            // Everyone decides from the time-t world state, then all states
            // advance together. The workspace boundary is a wall.
            const Vec2 robot_next =
                bounds.nearest_point(step_robot(robot, u, t, sc.field, dt) + sample_noise(sc.noise, rng));
            const AgentState robot_view{robot, Vec2::Zero(), sc.robot_goal};
            std::vector<Vec2> controls(agents.size());
            std::vector<AgentState> others;
            for (std::size_t i = 0; i < agents.size(); ++i) {
                others.assign(agents.begin(), agents.end());
                others.erase(others.begin() + static_cast<std::ptrdiff_t>(i));
                controls[i] = sfm_control(agents[i], &robot_view, others, sc.obstacles, sc.sfm_true);
            }

            bool hit_obstacle = false;
            for (const Box& box : sc.obstacles) {
                if (box.contains(robot_next)) {
                    hit_obstacle = true;
                    break;
                }
            }
            bool hit_agent = false;
            for (const AgentState& agent : agents) {
                if ((robot_next - agent.position).norm() < radius) {
                    hit_agent = true;
                    break;
                }
            }

            Vec2 executed_u = u;
            if (hit_obstacle || hit_agent) {
                ++out.emergency_stops;
                if (hit_obstacle) ++out.stops_from_obstacles;
                if (hit_agent) ++out.stops_from_agents;
                executed_u = Vec2::Zero();
            } else {
                out.distance_traveled += (robot_next - robot).norm();
                robot = robot_next;
            }

            for (AgentState& agent : agents) {
                const std::size_t i = static_cast<std::size_t>(&agent - agents.data());
                AgentState next = step_uncontrollable(agent, controls[i], t, sc.field, dt);
                next.position += sample_noise(sc.noise, rng);
                next.position = bounds.nearest_point(next.position);
                if ((next.position - next.goal).norm() < 0.5 * sc.cell_size) {
                    next.goal = detail::random_free_point(bounds, sc.obstacles, rng);
                }
                agent = next;
            }

            t += dt;
            ++executed;
            snapshot(executed, t, executed_u, hit_obstacle || hit_agent, k == 0 ? plan_s : 0.0);

            if (grid.discretize(robot) == goal) {
                out.reached_goal = true;
                out.time_to_goal = t;
                return out;
            }
        }
    }
    out.time_to_goal = t;
    return out;
}

struct MetricAggregate {
    PlannerKind planner = PlannerKind::Ours;
    int agent_count = 0;
    int trials = 0;
    int reached = 0;
    double mean_distance_m = 0.0;
    double std_distance_m = 0.0;
    double mean_time_s = 0.0;
    double std_time_s = 0.0;
    double mean_stops = 0.0;
    double std_stops = 0.0;
    int total_agent_stops = 0;
    int total_obstacle_stops = 0;
};

namespace detail {

/// First `count` agents come from the template; extras spawn at random free
/// points. The layout depends only on (template seed, count), so every
/// planner faces the same traffic.
inline std::vector<AgentSpec> spawn_agents(const Scenario& base, int count) {
    std::vector<AgentSpec> out(base.agents.begin(), base.agents.end());
    if (std::cmp_greater_equal(out.size(), count)) {
        out.resize(static_cast<std::size_t>(count));
        return out;
    }
    const Grid grid = base.make_grid();
    const Box bounds = grid.bounds();
    Rng rng(Rng::mix(base.seed, 0x9d2c5680u + static_cast<std::uint64_t>(count)));
    while (std::cmp_less(out.size(), count)) {
        AgentSpec spec;
        spec.start = random_free_point(bounds, base.obstacles, rng);
        spec.goal = random_free_point(bounds, base.obstacles, rng);
        out.push_back(spec);
    }
    return out;
}

struct Welford {
    int n = 0;
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sumsq += x * x;
    }
    [[nodiscard]] double mean() const { return n > 0 ? sum / n : 0.0; }
    /// Population standard deviation, so a single trial reports 0.
    [[nodiscard]] double stddev() const {
        if (n == 0) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, sumsq / n - m * m));
    }
};

}  // namespace detail

/// Runs `trials` seeded episodes per (agent count, planner) and aggregates
/// the metrics. Trial i uses the same derived seed for every planner, so the
/// comparison is paired.
inline std::vector<MetricAggregate> metrics_campaign(const Scenario& base,
                                                     std::span<const int> agent_counts, int trials,
                                                     std::span<const PlannerKind> planners) {
    if (trials < 1) throw ConfigError("campaign: need at least one trial");
    if (agent_counts.empty()) throw ConfigError("campaign: need at least one agent count");
    if (planners.empty()) throw ConfigError("campaign: need at least one planner");

    std::vector<MetricAggregate> out;
    for (const int count : agent_counts) {
        if (count < 0) throw ConfigError("campaign: agent count must be non-negative");
        const std::vector<AgentSpec> agents = detail::spawn_agents(base, count);
        for (const PlannerKind planner : planners) {
            MetricAggregate agg;
            agg.planner = planner;
            agg.agent_count = count;
            agg.trials = trials;
            detail::Welford dist, time, stops;
            for (int trial = 0; trial < trials; ++trial) {
                Scenario sc = base;
                sc.agents = agents;
                sc.planner_kind = planner;
                sc.seed = Rng::mix(base.seed, static_cast<std::uint64_t>(trial));
                const EpisodeResult result = run_episode(sc);
                if (result.reached_goal) ++agg.reached;
                dist.add(result.distance_traveled);
                time.add(result.time_to_goal);
                stops.add(static_cast<double>(result.emergency_stops));
                agg.total_agent_stops += result.stops_from_agents;
                agg.total_obstacle_stops += result.stops_from_obstacles;
            }
            agg.mean_distance_m = dist.mean();
            agg.std_distance_m = dist.stddev();
            agg.mean_time_s = time.mean();
            agg.std_time_s = time.stddev();
            agg.mean_stops = stops.mean();
            agg.std_stops = stops.stddev();
            out.push_back(agg);
        }
    }
    return out;
}

}  // namespace tvnav
