#pragma once

#include "tvnav/common.hpp"
#include "tvnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace tvnav {

enum class BaselineKind { Fhvi, Ersi, Pi };

/// All non-obstacle cells of the grid in linear order: the state space the
/// exhaustive baselines and exact policy evaluation operate on.
inline std::vector<Cell> valid_cells(const Grid& grid, std::span<const Box> obstacles) {
    std::vector<Cell> out;
    out.reserve(static_cast<std::size_t>(grid.cell_count()));
    for (int y = 0; y < grid.ny(); ++y) {
        for (int x = 0; x < grid.nx(); ++x) {
            const Cell c{x, y};
            if (!cell_in_any_box(grid, c, obstacles)) out.push_back(c);
        }
    }
    if (out.empty()) throw ConfigError("baselines: obstacles cover the whole grid");
    return out;
}

namespace detail {

/// Dense backward-induction engine over the valid-cell state space, shared
/// by exhaustive value iteration and exact policy evaluation. Rows are kept
/// dense on purpose: the exhaustive baseline exists to show full state-space
/// scaling, and truncating near-zero row entries would fake it away.
class DenseBackup {
public:
    DenseBackup(const PlanContext& ctx, const PlannerConfig& cfg)
        : ctx_(ctx), cfg_(cfg), valid_(valid_cells(ctx.grid, ctx.obstacles)) {
        const Mat2& q = ctx.noise.covariance();
        diagonal_ = ctx.noise.is_diagonal();
        if (diagonal_ && (!(q(0, 0) > 0.0) || !(q(1, 1) > 0.0))) {
            throw ConfigError("baselines: noise covariance must be positive-definite");
        }
        if (!diagonal_ && !(q.determinant() > 0.0)) {
            throw ConfigError("baselines: noise covariance must be positive-definite");
        }
        sx_ = std::sqrt(q(0, 0));
        sy_ = std::sqrt(q(1, 1));
    }

    [[nodiscard]] const std::vector<Cell>& states() const { return valid_; }

    [[nodiscard]] std::vector<double> terminal_values() const {
        std::vector<double> v(static_cast<std::size_t>(ctx_.grid.cell_count()), 0.0);
        for (const Cell& c : valid_) {
            v[static_cast<std::size_t>(ctx_.grid.linear(c))] = ctx_.reward.terminal_value(c);
        }
        return v;
    }

    /// Expected one-step return of taking `u` from `s` at step k: the
    /// transition row over all valid cells contracted against landing reward
    /// plus discounted continuation, in one pass.
    [[nodiscard]] double q_value(const Cell& s, const Vec2& u, int k, double t_k,
                                 const std::vector<double>& v_next) const {
        const Vec2 mean = step_robot(ctx_.grid.center(s), u, t_k, ctx_.field, cfg_.dt);
        const Grid& grid = ctx_.grid;

        double total = 0.0;
        double acc = 0.0;
        if (diagonal_) {
            const auto mx = axis_cell_masses(grid.origin()[0], grid.cell_size(), 0, grid.nx() - 1,
                                             mean[0], sx_);
            const auto my = axis_cell_masses(grid.origin()[1], grid.cell_size(), 0, grid.ny() - 1,
                                             mean[1], sy_);
            for (const Cell& c : valid_) {
                const double m = mx[static_cast<std::size_t>(c.x)] *
                                 my[static_cast<std::size_t>(c.y)];
                total += m;
                acc += m * (ctx_.reward.target_reward(k + 1, c) +
                            cfg_.gamma * v_next[static_cast<std::size_t>(grid.linear(c))]);
            }
        } else {
            const auto raw = gaussian_cell_masses(mean, ctx_.noise.covariance(), valid_, grid);
            for (std::size_t i = 0; i < valid_.size(); ++i) {
                total += raw[i];
                acc += raw[i] *
                       (ctx_.reward.target_reward(k + 1, valid_[i]) +
                        cfg_.gamma *
                            v_next[static_cast<std::size_t>(grid.linear(valid_[i]))]);
            }
        }
        if (total < 1e-300) {
            // Uniform degenerate row over the valid cells.
            double mean_r = 0.0;
            for (const Cell& c : valid_) {
                mean_r += ctx_.reward.target_reward(k + 1, c) +
                          cfg_.gamma * v_next[static_cast<std::size_t>(ctx_.grid.linear(c))];
            }
            return mean_r / static_cast<double>(valid_.size());
        }
        return acc / total;
    }

private:
    const PlanContext& ctx_;
    const PlannerConfig& cfg_;
    std::vector<Cell> valid_;
    bool diagonal_ = false;
    double sx_ = 0.0;
    double sy_ = 0.0;
};

}  // namespace detail

/// Finite-horizon value iteration: exact backward induction over every valid
/// cell and every action with the full grid as the admissible next set. The
/// optimal-policy yardstick the other planners are measured against.
inline TimedPolicy fhvi(double t0, const PlanContext& ctx, const PlannerConfig& cfg) {
    cfg.validate();
    const int T = cfg.horizon;
    detail::DenseBackup engine(ctx, cfg);

    TimedPolicy policy;
    policy.horizon = T;
    policy.actions.resize(static_cast<std::size_t>(T));
    policy.values.resize(static_cast<std::size_t>(T));
    policy.outer_iterations = 1;

    std::vector<double> v_next = engine.terminal_values();
    for (int k = T - 1; k >= 0; --k) {
        const double t_k = t0 + k * cfg.dt;
        std::vector<double> v_cur(static_cast<std::size_t>(ctx.grid.cell_count()), 0.0);
        auto& actions_k = policy.actions[static_cast<std::size_t>(k)];
        auto& values_k = policy.values[static_cast<std::size_t>(k)];
        actions_k.reserve(engine.states().size());
        values_k.reserve(engine.states().size());

        for (const Cell& s : engine.states()) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = -1;
            for (int a = 0; a < ctx.actions.size(); ++a) {
                const double q = engine.q_value(s, ctx.actions.value(a), k, t_k, v_next);
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            const std::int32_t id = ctx.grid.linear(s);
            v_cur[static_cast<std::size_t>(id)] = best;
            actions_k.emplace(id, best_a);
            values_k.emplace(id, best);
        }
        v_next = std::move(v_cur);
    }
    return policy;
}

/// Exact value of an arbitrary policy from `start`, by full backward policy
/// evaluation over the valid cells. States the policy never assigned fall
/// back to the nearest-to-zero action, so partial policies stay evaluable.
inline double evaluate_policy(const TimedPolicy& policy, const Cell& start, double t0,
                              const PlanContext& ctx, const PlannerConfig& cfg) {
    cfg.validate();
    const int T = cfg.horizon;
    detail::DenseBackup engine(ctx, cfg);
    const int fallback = ctx.actions.nearest(Vec2::Zero());

    std::vector<double> v_next = engine.terminal_values();
    for (int k = T - 1; k >= 0; --k) {
        const double t_k = t0 + k * cfg.dt;
        std::vector<double> v_cur(static_cast<std::size_t>(ctx.grid.cell_count()), 0.0);
        for (const Cell& s : engine.states()) {
            const std::int32_t id = ctx.grid.linear(s);
            const int a = policy.action_at(k, id, fallback);
            v_cur[static_cast<std::size_t>(id)] =
                engine.q_value(s, ctx.actions.value(a), k, t_k, v_next);
        }
        v_next = std::move(v_cur);
    }
    return v_next[static_cast<std::size_t>(ctx.grid.linear(start))];
}

namespace detail {

inline void merge_sorted_cells(std::vector<Cell>& into, const std::vector<Cell>& add,
                               const Grid& grid) {
    std::vector<Cell> merged;
    merged.reserve(into.size() + add.size());
    std::set_union(into.begin(), into.end(), add.begin(), add.end(), std::back_inserter(merged),
                   [&](const Cell& l, const Cell& r) { return grid.linear(l) < grid.linear(r); });
    into = std::move(merged);
}

}  // namespace detail

/// Exhaustive reachable-space iteration: walks every action sequence of
/// length T, accumulates the per-step union of the open-loop reachable sets,
/// and runs one constrained backward pass over those unions. The sequence
/// counter is reported so callers can verify the |A|^T enumeration; above
/// `sequence_cap` the call refuses instead of grinding.
inline TimedPolicy ersi(const Cell& start, double t0, const PlanContext& ctx,
                        const PlannerConfig& cfg, std::uint64_t sequence_cap = 2'000'000,
                        std::uint64_t* sequences_enumerated = nullptr) {
    cfg.validate();
    const int T = cfg.horizon;
    const auto n_actions = static_cast<std::uint64_t>(ctx.actions.size());

    std::uint64_t total_sequences = 1;
    for (int k = 0; k < T; ++k) {
        if (total_sequences > sequence_cap / n_actions) {
            throw EnumerationLimitError("ersi: |A|^T exceeds the sequence cap");
        }
        total_sequences *= n_actions;
    }
    if (total_sequences > sequence_cap) {
        throw EnumerationLimitError("ersi: |A|^T exceeds the sequence cap");
    }

    std::vector<std::vector<Cell>> unions(static_cast<std::size_t>(T) + 1);
    unions[0] = {start};

    std::uint64_t counter = 0;
    // Depth-first walk of the action-sequence prefix tree; the belief along
    // a prefix is shared by all sequences extending it.
    auto walk = [&](auto&& self, const GaussianBelief& b, int k) -> void {
        if (k == T) {
            ++counter;
            return;
        }
        const double t_k = t0 + k * cfg.dt;
        for (int a = 0; a < ctx.actions.size(); ++a) {
            const Vec2 u = ctx.actions.value(a);
            auto z = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                return step_robot(Vec2(x[0], x[1]), u, t_k, ctx.field, cfg.dt);
            };
            GaussianBelief next = ut_predict(b, z, ctx.noise.covariance(), cfg.ut);
            auto reach = reachable_states(next, cfg.alpha, ctx.grid, ctx.obstacles, k + 1,
                                          ReachableSource::Action, a);
            detail::merge_sorted_cells(unions[static_cast<std::size_t>(k) + 1], reach.states,
                                       ctx.grid);
            self(self, next, k + 1);
        }
    };
    walk(walk, make_belief(ctx.grid.center(start), Mat2::Zero()), 0);
    if (sequences_enumerated) *sequences_enumerated = counter;

    TimedPolicy policy;
    policy.horizon = T;
    policy.actions.resize(static_cast<std::size_t>(T));
    policy.values.resize(static_cast<std::size_t>(T));
    policy.outer_iterations = 1;

    for (int k = T - 1; k >= 0; --k) {
        const double t_k = t0 + k * cfg.dt;
        auto next_value = [&](const Cell& c) -> double {
            if (k + 1 == T) return ctx.reward.terminal_value(c);
            return policy.value_at(k + 1, ctx.grid.linear(c));
        };
        for (const Cell& s : unions[static_cast<std::size_t>(k)]) {
            const auto r = bellman_update(s, k, t_k, unions[static_cast<std::size_t>(k) + 1],
                                          next_value, ctx, cfg);
            const std::int32_t id = ctx.grid.linear(s);
            policy.actions[static_cast<std::size_t>(k)].emplace(id, r.action);
            policy.values[static_cast<std::size_t>(k)].emplace(id, r.value);
        }
    }
    return policy;
}

/// Reachable-space policy iteration: alternates a forward pass that traces
/// the belief (and its reachable sets) under the current policy with a
/// backward Bellman improvement restricted to those sets. Stops on policy
/// fixpoint, the iteration cap, or the time budget.
inline TimedPolicy pi_reachable(const Cell& start, double t0, const PlanContext& ctx,
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
        // Forward: policy-reachable sets from a collapsed belief at start.
        std::vector<std::vector<Cell>> sets(static_cast<std::size_t>(T) + 1);
        sets[0] = {start};
        GaussianBelief belief = make_belief(ctx.grid.center(start), Mat2::Zero());
        for (int k = 0; k < T; ++k) {
            const double t_k = t0 + k * cfg.dt;
            const Cell mean_cell = ctx.grid.discretize(mean2(belief));
            auto z = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                const Vec2 p(x[0], x[1]);
                const Vec2 u =
                    detail::policy_action(policy, k, ctx.grid, ctx.actions, p, mean_cell);
                return step_robot(p, u, t_k, ctx.field, cfg.dt);
            };
            belief = ut_predict(belief, z, ctx.noise.covariance(), cfg.ut);
            sets[static_cast<std::size_t>(k) + 1] =
                reachable_states(belief, cfg.alpha, ctx.grid, ctx.obstacles, k + 1).states;
        }

        // Backward: improve on the traced sets.
        std::vector<std::unordered_map<std::int32_t, int>> new_actions(
            static_cast<std::size_t>(T));
        std::vector<std::unordered_map<std::int32_t, double>> new_values(
            static_cast<std::size_t>(T));
        for (int k = T - 1; k >= 0; --k) {
            const double t_k = t0 + k * cfg.dt;
            auto next_value = [&](const Cell& c) -> double {
                if (k + 1 == T) return ctx.reward.terminal_value(c);
                const auto& table = new_values[static_cast<std::size_t>(k) + 1];
                const auto it = table.find(ctx.grid.linear(c));
                return it == table.end() ? 0.0 : it->second;
            };
            for (const Cell& s : sets[static_cast<std::size_t>(k)]) {
                const auto r = bellman_update(s, k, t_k, sets[static_cast<std::size_t>(k) + 1],
                                              next_value, ctx, cfg);
                const std::int32_t id = ctx.grid.linear(s);
                new_actions[static_cast<std::size_t>(k)].emplace(id, r.action);
                new_values[static_cast<std::size_t>(k)].emplace(id, r.value);
            }
        }

        const bool unchanged = new_actions == policy.actions;
        policy.actions = std::move(new_actions);
        policy.values = std::move(new_values);
        policy.outer_iterations = sweep + 1;
        policy.start_value_trace.push_back(policy.value_at(0, start_id));
        if (unchanged) break;

        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - began;
        if (elapsed.count() > cfg.time_budget_s && sweep + 1 < cfg.max_outer_iterations) {
            policy.truncated = true;
            break;
        }
    }
    return policy;
}

}  // namespace tvnav
