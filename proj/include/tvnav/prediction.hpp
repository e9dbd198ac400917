#pragma once

#include "tvnav/common.hpp"
#include "tvnav/dynamics.hpp"
#include "tvnav/grid.hpp"
#include "tvnav/reachable.hpp"
#include "tvnav/transition.hpp"
#include "tvnav/unscented.hpp"

#include <span>
#include <vector>

namespace tvnav {

/// Where one uncontrollable vehicle may be at one future decision step:
/// cells of its confidence region with normalized Gaussian masses.
struct OccupancyMap {
    std::vector<TargetProb> cells;  // sorted by linear id; probs sum to 1

    [[nodiscard]] double prob_at(const Cell& c) const {
        for (const auto& t : cells) {
            if (t.cell == c) return t.prob;
        }
        return 0.0;
    }
};

/// Forecast of every uncontrollable vehicle over the planning horizon.
/// steps[k][i] is vehicle i's occupancy at decision step k (index 0 is kept
/// empty so indices line up with step numbers); beliefs[k][i] the Gaussian
/// it was cut from.
struct PredictionResult {
    std::vector<std::vector<OccupancyMap>> steps;
    std::vector<std::vector<GaussianBelief>> beliefs;
};

/// Rolls every agent's belief forward through the horizon. Controls come
/// from the believed social-force model evaluated at the current belief
/// means (each vehicle planned independently, interactions through means
/// only); each belief then moves through the unscented transform, and its
/// occupancy is the normalized Gaussian cell mass over its own
/// alpha-confidence region. The robot enters the agents' force fields as a
/// drifting mean with zero control, since its future actions are the very
/// thing still being decided.
inline PredictionResult predict_other_vehicles(std::span<const AgentState> agents,
                                               const GaussianBelief& robot_belief,
                                               const SfmParams& believed, const TimeAxis& axis,
                                               const DisturbanceField& field,
                                               const NoiseModel& noise, double alpha,
                                               const Grid& grid, std::span<const Box> obstacles,
                                               const UtParams& ut = {}) {
    const int horizon = axis.horizon;
    const std::size_t n = agents.size();

    PredictionResult out;
    out.steps.resize(static_cast<std::size_t>(horizon) + 1);
    out.beliefs.resize(static_cast<std::size_t>(horizon) + 1);
    if (n == 0) return out;

    std::vector<AgentState> mean_states(agents.begin(), agents.end());
    std::vector<GaussianBelief> beliefs;
    beliefs.reserve(n);
    for (const AgentState& a : agents) beliefs.push_back(make_belief(a.position, Mat2::Zero()));
    out.beliefs[0] = beliefs;

    Vec2 robot_mean = mean2(robot_belief);

    for (int k = 0; k < horizon; ++k) {
        const double t = axis.at(k);

        std::vector<Vec2> controls(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<AgentState> others;
            others.reserve(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) others.push_back(mean_states[j]);
            }
            AgentState robot_proxy;
            robot_proxy.position = robot_mean;
            controls[i] = sfm_control(mean_states[i], &robot_proxy, others, obstacles, believed);
        }

        std::vector<OccupancyMap> maps(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 u = controls[i];
            auto z = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                AgentState s = mean_states[i];
                s.position = Vec2(x[0], x[1]);
                return step_uncontrollable(s, u, t, field, axis.dt).position;
            };
            beliefs[i] = ut_predict(beliefs[i], z, noise.covariance(), ut);

            auto region = reachable_states(beliefs[i], alpha, grid, obstacles, k + 1);
            auto raw = gaussian_cell_masses(mean2(beliefs[i]), cov2(beliefs[i]), region.states,
                                            grid);
            double total = 0.0;
            for (double v : raw) total += v;
            OccupancyMap map;
            map.cells.reserve(region.states.size());
            if (total < 1e-300) {
                const double p = 1.0 / static_cast<double>(region.states.size());
                for (const Cell& c : region.states) map.cells.push_back({c, p});
            } else {
                for (std::size_t j = 0; j < region.states.size(); ++j) {
                    map.cells.push_back({region.states[j], raw[j] / total});
                }
            }
            maps[i] = std::move(map);

            mean_states[i].position = mean2(beliefs[i]);
            mean_states[i].velocity = u;
        }
        out.steps[static_cast<std::size_t>(k) + 1] = std::move(maps);
        out.beliefs[static_cast<std::size_t>(k) + 1] = beliefs;

        robot_mean = step_robot(robot_mean, Vec2::Zero(), t, field, axis.dt);
    }
    return out;
}

struct RewardConfig {
    double collision_penalty = -100.0;
    double occupancy_scale = 1.0;  // the eta factor applied to summed occupancies
    double goal_bonus = 100.0;
    double terminal_weight = 1.0;  // reward per meter of remaining distance, negated
};

/// Shared reward for every planner: a per-step collision field assembled
/// from the occupancy forecasts, a fixed bonus for stepping onto the goal
/// cell, and a terminal shaping term proportional to remaining distance.
class RewardModel {
public:
    RewardModel(const Grid& grid, const Cell& goal, const PredictionResult& prediction,
                RewardConfig config = {})
        : grid_(grid), goal_(goal), config_(config) {
        collision_.resize(prediction.steps.size());
        for (std::size_t k = 0; k < prediction.steps.size(); ++k) {
            if (prediction.steps[k].empty()) continue;
            collision_[k].assign(static_cast<std::size_t>(grid.cell_count()), 0.0);
            for (const OccupancyMap& map : prediction.steps[k]) {
                for (const auto& t : map.cells) {
                    collision_[k][static_cast<std::size_t>(grid.linear(t.cell))] +=
                        config.occupancy_scale * t.prob * config.collision_penalty;
                }
            }
        }
    }

    RewardModel(const Grid& grid, const Cell& goal, RewardConfig config = {})
        : RewardModel(grid, goal, PredictionResult{}, config) {}

    [[nodiscard]] const Cell& goal() const { return goal_; }
    [[nodiscard]] const RewardConfig& config() const { return config_; }

    /// Reward collected by a transition that lands on `c` at decision step
    /// `next_step`: summed collision penalties plus the goal bonus.
    [[nodiscard]] double target_reward(int next_step, const Cell& c) const {
        double r = (c == goal_) ? config_.goal_bonus : 0.0;
        const auto k = static_cast<std::size_t>(next_step);
        if (k < collision_.size() && !collision_[k].empty()) {
            r += collision_[k][static_cast<std::size_t>(grid_.linear(c))];
        }
        return r;
    }

    /// Value assigned to holding state `c` at the end of the horizon.
    [[nodiscard]] double terminal_value(const Cell& c) const {
        return -config_.terminal_weight * (grid_.center(c) - grid_.center(goal_)).norm();
    }

private:
    Grid grid_;  // by value: a RewardModel must not dangle when scenario objects move
    Cell goal_;
    RewardConfig config_;
    std::vector<std::vector<double>> collision_;  // [step][linear cell], empty step = all zero
};

/// Expected one-step reward of a transition row: the row's probabilities
/// against the landing rewards of the step it transitions into.
inline double step_reward(const TransitionRow& row, const RewardModel& reward) {
    double r = 0.0;
    for (const auto& t : row.targets) {
        r += t.prob * reward.target_reward(row.step + 1, t.cell);
    }
    return r;
}

}  // namespace tvnav
