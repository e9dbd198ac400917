#pragma once

#include "tvnav/baselines.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tvnav {

enum class PlannerKind { Ours, Fhvi, Ersi, Pi };

inline const char* planner_name(PlannerKind kind) {
    switch (kind) {
        case PlannerKind::Ours: return "ours";
        case PlannerKind::Fhvi: return "fhvi";
        case PlannerKind::Ersi: return "ersi";
        case PlannerKind::Pi: return "pi";
    }
    throw ConfigError("planner: unknown kind");
}

inline PlannerKind parse_planner(std::string_view name) {
    if (name == "ours") return PlannerKind::Ours;
    if (name == "fhvi") return PlannerKind::Fhvi;
    if (name == "ersi") return PlannerKind::Ersi;
    if (name == "pi") return PlannerKind::Pi;
    throw ConfigError("planner: unknown kind '" + std::string(name) +
                      "' (expected ours, fhvi, ersi, or pi)");
}

struct AgentSpec {
    Vec2 start = Vec2::Zero();
    Vec2 goal = Vec2::Zero();
};

/// Complete description of one experiment: the world, the traffic, the
/// planner, and the seed. Everything an episode needs, and nothing that
/// changes behind its back.
struct Scenario {
    std::string name = "scenario";

    Vec2 grid_origin = Vec2::Zero();
    Vec2 grid_extent = Vec2(30.0, 30.0);
    double cell_size = 1.0;

    std::vector<Box> obstacles;

    Vec2 robot_start = Vec2(2.5, 2.5);
    Vec2 robot_goal = Vec2(27.5, 27.5);

    std::vector<AgentSpec> agents;

    DisturbanceField field;
    NoiseModel noise;

    SfmParams sfm_true;
    SfmParams sfm_belief;

    int action_levels = 3;
    double action_bound = 2.5;

    PlannerKind planner_kind = PlannerKind::Ours;
    PlannerConfig planner;
    RewardConfig reward;

    /// Emergency-stop distance; negative means "use half a cell".
    double collision_radius = -1.0;
    int step_cap = 400;
    std::uint64_t seed = 1;
    std::uint64_t ersi_sequence_cap = 2'000'000;

    [[nodiscard]] Grid make_grid() const { return Grid(grid_origin, grid_extent, cell_size); }
    [[nodiscard]] ActionSpace make_actions() const {
        return ActionSpace(action_levels, action_bound);
    }
    [[nodiscard]] double stop_radius() const {
        return collision_radius >= 0.0 ? collision_radius : 0.5 * cell_size;
    }

    /// Throws ConfigError naming the first violated invariant.
    void validate() const {
        const Grid grid = make_grid();
        const ActionSpace actions = make_actions();
        (void)actions;
        planner.validate();
        if (step_cap < 1) throw ConfigError("scenario: step cap must be at least 1");

        const Box bounds = grid.bounds();
        auto check_point = [&](const Vec2& p, const char* what, bool forbid_obstacle) {
            if (!bounds.contains(p)) {
                throw ConfigError(std::string("scenario: ") + what + " is outside the workspace");
            }
            if (forbid_obstacle) {
                for (const Box& box : obstacles) {
                    if (box.contains(p)) {
                        throw ConfigError(std::string("scenario: ") + what +
                                          " is inside an obstacle");
                    }
                }
            }
        };
        check_point(robot_start, "robot start", true);
        check_point(robot_goal, "goal", true);
        // The planner steers toward the goal cell's center; an obstructed
        // center would make the goal unreachable even with a clear goal point.
        check_point(grid.center(grid.discretize(robot_goal)), "goal cell center", true);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const std::string label = "agent " + std::to_string(i);
            check_point(agents[i].start, (label + " start").c_str(), true);
            check_point(agents[i].goal, (label + " goal").c_str(), false);
        }
    }
};

}  // namespace tvnav
