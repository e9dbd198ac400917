#pragma once

#include "tvnav/common.hpp"
#include "tvnav/disturbance.hpp"
#include "tvnav/dynamics.hpp"
#include "tvnav/grid.hpp"
#include "tvnav/unscented.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace tvnav {

namespace detail {

/// Regularized lower incomplete gamma P(a, x) by series expansion,
/// valid and fast for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction,
/// valid and fast for x >= a + 1. Accurate deep into the tail, which the
/// quantile bisection relies on for alpha very close to 1.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: domain error");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

}  // namespace detail

/// Quantile of the chi-squared distribution with `dof` degrees of freedom:
/// the x with P(chi2 <= x) = alpha. Bisection on the regularized incomplete
/// gamma function; the upper-tail form keeps the bracket well conditioned
/// when alpha approaches 1.
inline double chi2_quantile(int dof, double alpha) {
    if (dof < 1) throw ConfigError("chi2_quantile: degrees of freedom must be >= 1");
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw ConfigError("chi2_quantile: confidence must lie strictly inside (0, 1)");
    }
    const double a = 0.5 * dof;
    const double tail = 1.0 - alpha;

    double hi = 1.0;
    while (detail::gamma_q(a, 0.5 * hi) > tail) {
        hi *= 2.0;
        if (hi > 1e6) break;
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (detail::gamma_q(a, 0.5 * mid) > tail) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

/// Confidence region {x : (mu - x)^T Sigma^{-1} (mu - x) <= threshold}.
/// The shape matrix is Tikhonov-regularized before inversion so degenerate
/// beliefs (Sigma = 0) still give a well-defined, point-like region.
class ConfidenceEllipsoid {
public:
    ConfidenceEllipsoid(const Vec2& center, const Mat2& shape, double threshold)
        : center_(center), shape_(shape), threshold_(threshold) {
        if (!(threshold > 0.0)) throw ConfigError("ellipsoid: threshold must be positive");
        regularized_ = 0.5 * (shape + shape.transpose()) + 1e-9 * Mat2::Identity();
        inverse_ = regularized_.inverse();
    }

    [[nodiscard]] const Vec2& center() const { return center_; }
    [[nodiscard]] const Mat2& shape() const { return shape_; }
    [[nodiscard]] double threshold() const { return threshold_; }

    [[nodiscard]] bool contains(const Vec2& x) const {
        const Vec2 d = center_ - x;
        return d.dot(inverse_ * d) <= threshold_;
    }

    /// Tight axis-aligned bounding box of the region.
    [[nodiscard]] Box bounding_box() const {
        const Vec2 half(std::sqrt(threshold_ * regularized_(0, 0)),
                        std::sqrt(threshold_ * regularized_(1, 1)));
        return Box{center_ - half, center_ + half};
    }

private:
    Vec2 center_;
    Mat2 shape_;
    double threshold_;
    Mat2 regularized_;
    Mat2 inverse_;
};

inline bool ellipsoid_membership(const ConfidenceEllipsoid& e, const Vec2& x) {
    return e.contains(x);
}

enum class ReachableSource { Policy, Action, Union };

/// Discrete states reachable at one decision step. States are kept sorted by
/// linear cell id, which makes unions cheap and iteration order canonical.
struct ReachableSpace {
    int step = 0;
    std::vector<Cell> states;
    ReachableSource source = ReachableSource::Policy;
    int action = -1;  // meaningful when source == Action
};

inline bool cell_in_any_box(const Grid& grid, const Cell& c, std::span<const Box> boxes) {
    const Vec2 p = grid.center(c);
    return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains(p); });
}

namespace detail {

inline Cell nearest_valid_cell(const Grid& grid, const Cell& from, std::span<const Box> obstacles) {
    if (!cell_in_any_box(grid, from, obstacles)) return from;
    const Vec2 origin = grid.center(from);
    Cell best{};
    double best_d = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int y = 0; y < grid.ny(); ++y) {
        for (int x = 0; x < grid.nx(); ++x) {
            const Cell c{x, y};
            if (cell_in_any_box(grid, c, obstacles)) continue;
            const double d = (grid.center(c) - origin).squaredNorm();
            if (!found || d < best_d) {
                found = true;
                best_d = d;
                best = c;
            }
        }
    }
    if (!found) throw ConfigError("reachable: every cell of the grid is covered by obstacles");
    return best;
}

}  // namespace detail

/// All in-bounds, non-obstacle cells whose centers fall inside the
/// alpha-confidence ellipsoid of the belief. An empty intersection falls
/// back to the nearest valid singleton so downstream search never stalls.
inline ReachableSpace reachable_states(const GaussianBelief& b, double alpha, const Grid& grid,
                                       std::span<const Box> obstacles, int step = 0,
                                       ReachableSource source = ReachableSource::Policy,
                                       int action = -1) {
    const Vec2 mu(b.mean[0], b.mean[1]);
    const ConfidenceEllipsoid region(mu, Mat2(b.covariance), chi2_quantile(2, alpha));

    ReachableSpace out;
    out.step = step;
    out.source = source;
    out.action = action;

    const Box bb = region.bounding_box();
    const Cell lo = grid.discretize(bb.lo);
    const Cell hi = grid.discretize(bb.hi);
    for (int y = lo.y; y <= hi.y; ++y) {
        for (int x = lo.x; x <= hi.x; ++x) {
            const Cell c{x, y};
            if (!region.contains(grid.center(c))) continue;
            if (cell_in_any_box(grid, c, obstacles)) continue;
            out.states.push_back(c);
        }
    }
    if (out.states.empty()) {
        out.states.push_back(detail::nearest_valid_cell(grid, grid.discretize(mu), obstacles));
    }
    return out;
}

/// Per-action one-step lookahead (the action analogue of the policy
/// reachable set): predicts a belief per action with the UT and returns the
/// union of the per-action reachable sets along with those beliefs.
inline std::pair<ReachableSpace, std::vector<GaussianBelief>> reachable_space_of_actions(
    const GaussianBelief& b_k, std::span<const Vec2> actions, double t_k,
    const DisturbanceField& field, const Mat2& process_noise, double alpha, const Grid& grid,
    std::span<const Box> obstacles, double dt, int next_step, const UtParams& ut = {}) {
    std::vector<GaussianBelief> beliefs;
    beliefs.reserve(actions.size());

    std::vector<Cell> merged;
    for (int a = 0; a < static_cast<int>(actions.size()); ++a) {
        const Vec2& u = actions[static_cast<std::size_t>(a)];
        auto z = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return step_robot(Vec2(x[0], x[1]), u, t_k, field, dt);
        };
        GaussianBelief next = ut_predict(b_k, z, process_noise, ut);
        ReachableSpace ra = reachable_states(next, alpha, grid, obstacles, next_step,
                                             ReachableSource::Action, a);
        beliefs.push_back(std::move(next));

        std::vector<Cell> unioned;
        unioned.reserve(merged.size() + ra.states.size());
        std::set_union(merged.begin(), merged.end(), ra.states.begin(), ra.states.end(),
                       std::back_inserter(unioned),
                       [&](const Cell& l, const Cell& r) { return grid.linear(l) < grid.linear(r); });
        merged = std::move(unioned);
    }

    ReachableSpace unioned;
    unioned.step = next_step;
    unioned.source = ReachableSource::Union;
    unioned.states = std::move(merged);
    return {std::move(unioned), std::move(beliefs)};
}

inline std::pair<ReachableSpace, std::vector<GaussianBelief>> reachable_space_of_actions(
    const GaussianBelief& b_k, const ActionSpace& actions, double t_k,
    const DisturbanceField& field, const Mat2& process_noise, double alpha, const Grid& grid,
    std::span<const Box> obstacles, double dt, int next_step, const UtParams& ut = {}) {
    std::vector<Vec2> values;
    values.reserve(static_cast<std::size_t>(actions.size()));
    for (int a = 0; a < actions.size(); ++a) values.push_back(actions.value(a));
    return reachable_space_of_actions(b_k, std::span<const Vec2>(values), t_k, field,
                                      process_noise, alpha, grid, obstacles, dt, next_step, ut);
}

}  // namespace tvnav
