#pragma once

#include "tvnav/common.hpp"
#include "tvnav/disturbance.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace tvnav {

struct AgentState {
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
    Vec2 goal = Vec2::Zero();
};

/// Social-force parameters. Appears twice per scenario: the simulation truth
/// and the (possibly mismatched) belief the planner predicts with.
struct SfmParams {
    double goal_gain = 1.0;            // 1/s
    double desired_speed = 1.5;        // m/s
    double repulsion_strength = 2.0;   // m/s^2
    double repulsion_range = 2.0;      // m
    double obstacle_strength = 3.0;    // m/s^2
    double obstacle_range = 1.5;       // m
    double max_speed = 2.0;            // m/s
};

/// Single-integrator step: x + u*dt + g(x,t). Deterministic form.
inline Vec2 step_robot(const Vec2& x, const Vec2& u, double t, const DisturbanceField& field,
                       double dt) {
    return x + u * dt + eval_field(field, x, t, dt);
}

/// Noisy form, adding a draw from the noise model.
inline Vec2 step_robot(const Vec2& x, const Vec2& u, double t, const DisturbanceField& field,
                       const NoiseModel& noise, Rng& rng, double dt) {
    return step_robot(x, u, t, field, dt) + sample_noise(noise, rng);
}

/// Density of the next state under the one-step Gaussian transition model.
inline double transition_density(const Vec2& x_next, const Vec2& x, const Vec2& u, double t,
                                 const DisturbanceField& field, const NoiseModel& noise,
                                 double dt) {
    const Mat2& q = noise.covariance();
    const double det = q.determinant();
    if (!(det > 0.0)) {
        throw ConfigError("transition_density: singular noise covariance; use the deterministic step");
    }
    const Vec2 d = x_next - step_robot(x, u, t, field, dt);
    const double m2 = d.dot(q.inverse() * d);
    return std::exp(-0.5 * m2) / (2.0 * M_PI * std::sqrt(det));
}

namespace detail {

// Direction from `from` to `to`; coincident points fall back to +x so the
// repulsion terms stay finite (documented degenerate rule).
inline Vec2 away_direction(const Vec2& at, const Vec2& from) {
    const Vec2 d = at - from;
    const double n = d.norm();
    if (n == 0.0) return Vec2(1.0, 0.0);
    return d / n;
}

}  // namespace detail

/// Social-force velocity command: goal attraction plus exponential repulsion
/// from the robot, the other agents, and the nearest point of each obstacle,
/// clipped to the maximum speed. `others` must not contain `self`.
inline Vec2 sfm_control(const AgentState& self, const AgentState* robot,
                        std::span<const AgentState> others, std::span<const Box> obstacles,
                        const SfmParams& p) {
    Vec2 cmd = Vec2::Zero();

    const Vec2 to_goal = self.goal - self.position;
    const double goal_dist = to_goal.norm();
    const Vec2 desired = goal_dist > 0.0 ? Vec2(p.desired_speed * to_goal / goal_dist) : Vec2(Vec2::Zero());
    cmd += p.goal_gain * (desired - self.velocity);

    auto repel = [&](const Vec2& other_pos, double strength, double range) {
        const double dist = (self.position - other_pos).norm();
        cmd += strength * std::exp(-dist / range) * detail::away_direction(self.position, other_pos);
    };

    if (robot != nullptr) repel(robot->position, p.repulsion_strength, p.repulsion_range);
    for (const AgentState& other : others) {
        repel(other.position, p.repulsion_strength, p.repulsion_range);
    }
    for (const Box& box : obstacles) {
        repel(box.nearest_point(self.position), p.obstacle_strength, p.obstacle_range);
    }

    const double speed = cmd.norm();
    if (speed > p.max_speed) cmd *= p.max_speed / speed;
    return cmd;
}

/// Same integrator as the robot; the stored velocity becomes the executed
/// control, which later SFM evaluations read as the agent's motion state.
inline AgentState step_uncontrollable(const AgentState& y, const Vec2& u_y, double t,
                                      const DisturbanceField& field, double dt) {
    AgentState next = y;
    next.position = step_robot(y.position, u_y, t, field, dt);
    next.velocity = u_y;
    return next;
}

inline AgentState step_uncontrollable(const AgentState& y, const Vec2& u_y, double t,
                                      const DisturbanceField& field, const NoiseModel& noise,
                                      Rng& rng, double dt) {
    AgentState next = step_uncontrollable(y, u_y, t, field, dt);
    next.position += sample_noise(noise, rng);
    return next;
}

}  // namespace tvnav
