#pragma once

#include "tvnav/common.hpp"
#include "tvnav/disturbance.hpp"
#include "tvnav/dynamics.hpp"
#include "tvnav/grid.hpp"
#include "tvnav/prediction.hpp"
#include "tvnav/reachable.hpp"
#include "tvnav/transition.hpp"
#include "tvnav/unscented.hpp"

#include <chrono>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

namespace tvnav {

struct PlannerConfig {
    int horizon = 4;
    double dt = 0.5;
    double alpha = 0.95;   // confidence level of the reachable regions
    double gamma = 0.95;   // discount factor
    int max_outer_iterations = 5;
    double time_budget_s = 0.8;
    UtParams ut;

    void validate() const {
        if (horizon < 1) throw ConfigError("planner: horizon must be >= 1");
        if (!(dt > 0.0)) throw ConfigError("planner: dt must be positive");
        if (!(gamma >= 0.0) || gamma >= 1.0) throw ConfigError("planner: gamma must be in [0, 1)");
        if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("planner: alpha must be in (0, 1)");
        if (max_outer_iterations < 1) throw ConfigError("planner: need at least one iteration");
        if (!(time_budget_s > 0.0)) throw ConfigError("planner: time budget must be positive");
    }
};

/// Everything a planning pass needs to know about the world. Views only; the
/// caller keeps the referenced objects alive.
struct PlanContext {
    const Grid& grid;
    const ActionSpace& actions;
    const DisturbanceField& field;
    const NoiseModel& noise;
    std::span<const Box> obstacles;
    const RewardModel& reward;
};

/// Non-stationary policy and value tables over the horizon. Entries exist
/// only for states some planner pass visited; everything else falls back to
/// defaults at lookup time.
struct TimedPolicy {
    int horizon = 0;
    std::vector<std::unordered_map<std::int32_t, int>> actions;    // [k], k = 0..T-1
    std::vector<std::unordered_map<std::int32_t, double>> values;  // [k], k = 0..T-1
    bool truncated = false;       // stopped by the time budget
    int outer_iterations = 0;
    std::vector<double> start_value_trace;  // value at the start state per sweep

    [[nodiscard]] int action_at(int k, std::int32_t cell, int fallback = -1) const {
        if (k < 0 || k >= static_cast<int>(actions.size())) return fallback;
        const auto it = actions[static_cast<std::size_t>(k)].find(cell);
        return it == actions[static_cast<std::size_t>(k)].end() ? fallback : it->second;
    }

    [[nodiscard]] double value_at(int k, std::int32_t cell, double fallback = 0.0) const {
        if (k < 0 || k >= static_cast<int>(values.size())) return fallback;
        const auto it = values[static_cast<std::size_t>(k)].find(cell);
        return it == values[static_cast<std::size_t>(k)].end() ? fallback : it->second;
    }
};

struct BellmanResult {
    double value = -std::numeric_limits<double>::infinity();
    int action = -1;
};

/// One constrained Bellman backup at state `s`, decision step `k`: maximizes
/// the expected landing reward plus discounted continuation over the
/// admissible next set. Continuation values come from `next_value`, which
/// the caller points at the following step's table (or the terminal reward).
/// Ties go to the lowest action index.
template <typename NextValue>
BellmanResult bellman_update(const Cell& s, int k, double t_k, std::span<const Cell> next_set,
                             NextValue&& next_value, const PlanContext& ctx,
                             const PlannerConfig& cfg) {
    BellmanResult best;
    for (int a = 0; a < ctx.actions.size(); ++a) {
        const TransitionRow row = transition_row(s, ctx.actions.value(a), t_k, next_set, ctx.field,
                                                 ctx.noise, ctx.grid, cfg.dt, a, k);
        double q = 0.0;
        for (const auto& t : row.targets) {
            q += t.prob *
                 (ctx.reward.target_reward(k + 1, t.cell) + cfg.gamma * next_value(t.cell));
        }
        if (q > best.value) {
            best.value = q;
            best.action = a;
        }
    }
    return best;
}

namespace detail {

/// Policy lookup used when pushing the belief through a planning step: sigma
/// points can stray off the set the sweep assigned actions to, so fall back
/// to the action at the belief mean's cell, then to a zero-ish action.
inline Vec2 policy_action(const TimedPolicy& policy, int k, const Grid& grid,
                          const ActionSpace& actions, const Vec2& point, const Cell& mean_cell) {
    const int zero = actions.nearest(Vec2::Zero());
    int a = policy.action_at(k, grid.linear(grid.discretize(point)));
    if (a < 0) a = policy.action_at(k, grid.linear(mean_cell), zero);
    return actions.value(a);
}

}  // namespace detail

/// Iterated three-stage policy search over reachable spaces. Each sweep
/// walks the horizon forward: (1) predict the per-action reachable union,
/// (2) back up every state of the current policy-reachable set against it,
/// (3) push the belief through the just-updated policy to get the next
/// policy-reachable set. Sweeps repeat until the policy stops changing, the
/// iteration cap is hit, or the time budget runs out (which sets the
/// truncation flag).
inline TimedPolicy policy_search(const Cell& start, double t0, const PlanContext& ctx,
                                 const PlannerConfig& cfg) {
    cfg.validate();
    const auto began = std::chrono::steady_clock::now();
    const int T = cfg.horizon;

    TimedPolicy policy;
    policy.horizon = T;
    policy.actions.resize(static_cast<std::size_t>(T));
    policy.values.resize(static_cast<std::size_t>(T));

    const std::int32_t start_id = ctx.grid.linear(start);

    for (int sweep = 0; sweep < cfg.max_outer_iterations; ++sweep) {
        bool changed = false;

        GaussianBelief belief = make_belief(ctx.grid.center(start), Mat2::Zero());
        ReachableSpace reach;
        reach.step = 0;
        reach.states = {start};

        for (int k = 0; k < T; ++k) {
            const double t_k = t0 + k * cfg.dt;
            auto [next_union, action_beliefs] = reachable_space_of_actions(
                belief, ctx.actions, t_k, ctx.field, ctx.noise.covariance(), cfg.alpha, ctx.grid,
                ctx.obstacles, cfg.dt, k + 1, cfg.ut);

            auto next_value = [&](const Cell& c) -> double {
                if (k + 1 == T) return ctx.reward.terminal_value(c);
                return policy.value_at(k + 1, ctx.grid.linear(c));
            };
            for (const Cell& s : reach.states) {
                const auto r = bellman_update(s, k, t_k, next_union.states, next_value, ctx, cfg);
                const std::int32_t id = ctx.grid.linear(s);
                auto [it, inserted] = policy.actions[static_cast<std::size_t>(k)].try_emplace(
                    id, r.action);
                if (!inserted && it->second != r.action) {
                    it->second = r.action;
                    changed = true;
                } else if (inserted) {
                    changed = true;
                }
                policy.values[static_cast<std::size_t>(k)][id] = r.value;
            }

            const Cell mean_cell = ctx.grid.discretize(mean2(belief));
            auto z = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                const Vec2 p(x[0], x[1]);
                const Vec2 u =
                    detail::policy_action(policy, k, ctx.grid, ctx.actions, p, mean_cell);
                return step_robot(p, u, t_k, ctx.field, cfg.dt);
            };
            belief = ut_predict(belief, z, ctx.noise.covariance(), cfg.ut);
            reach = reachable_states(belief, cfg.alpha, ctx.grid, ctx.obstacles, k + 1);
        }

        policy.outer_iterations = sweep + 1;
        policy.start_value_trace.push_back(policy.value_at(0, start_id));

        if (!changed) break;
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - began;
        if (elapsed.count() > cfg.time_budget_s && sweep + 1 < cfg.max_outer_iterations) {
            policy.truncated = true;
            break;
        }
    }
    return policy;
}

}  // namespace tvnav
