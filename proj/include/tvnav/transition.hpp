#pragma once

#include "tvnav/common.hpp"
#include "tvnav/disturbance.hpp"
#include "tvnav/dynamics.hpp"
#include "tvnav/grid.hpp"
#include "tvnav/reachable.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace tvnav {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Mass of N(mean, sigma^2) over each axis cell i in [i0, i1], where cell i
/// spans [origin + i*h, origin + (i+1)*h]. Computed as CDF differences at the
/// cell edges.
inline std::vector<double> axis_cell_masses(double origin, double h, int i0, int i1, double mean,
                                            double sigma) {
    std::vector<double> out(static_cast<std::size_t>(i1 - i0 + 1));
    double prev = normal_cdf((origin + i0 * h - mean) / sigma);
    for (int i = i0; i <= i1; ++i) {
        const double next = normal_cdf((origin + (i + 1) * h - mean) / sigma);
        out[static_cast<std::size_t>(i - i0)] = next - prev;
        prev = next;
    }
    return out;
}

struct TargetProb {
    Cell cell;
    double prob;
};

/// Raw (unnormalized) masses of N(mean, cov) over the given cells. Diagonal
/// covariances use exact per-axis CDF differences; correlated ones integrate
/// the density with an 8x8 Gauss-Legendre rule per cell. Near-singular
/// covariances are nudged just enough to stay computable, so a collapsed
/// belief concentrates all mass on the cell holding its mean.
inline std::vector<double> gaussian_cell_masses(const Vec2& mean, const Mat2& cov,
                                                std::span<const Cell> cells, const Grid& grid) {
    std::vector<double> raw(cells.size(), 0.0);
    if (cells.empty()) return raw;

    const Mat2 sym = 0.5 * (cov + cov.transpose());
    const double scale = std::max({sym(0, 0), sym(1, 1), 1e-18});
    const bool diagonal = std::abs(sym(0, 1)) <= 1e-12 * scale;

    if (diagonal) {
        int x_lo = cells[0].x, x_hi = cells[0].x;
        int y_lo = cells[0].y, y_hi = cells[0].y;
        for (const Cell& c : cells) {
            x_lo = std::min(x_lo, c.x);
            x_hi = std::max(x_hi, c.x);
            y_lo = std::min(y_lo, c.y);
            y_hi = std::max(y_hi, c.y);
        }
        const double sx = std::sqrt(std::max(sym(0, 0), 1e-18));
        const double sy = std::sqrt(std::max(sym(1, 1), 1e-18));
        const auto mx = axis_cell_masses(grid.origin()[0], grid.cell_size(), x_lo, x_hi, mean[0], sx);
        const auto my = axis_cell_masses(grid.origin()[1], grid.cell_size(), y_lo, y_hi, mean[1], sy);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            raw[i] = mx[static_cast<std::size_t>(cells[i].x - x_lo)] *
                     my[static_cast<std::size_t>(cells[i].y - y_lo)];
        }
        return raw;
    }

    Mat2 reg = sym;
    if (!(reg.determinant() > 0.0)) reg += 1e-12 * scale * Mat2::Identity();
    static constexpr double gl_x[8] = {
        -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
        0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    static constexpr double gl_w[8] = {
        0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
        0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    const Mat2 inv = reg.inverse();
    const double half = 0.5 * grid.cell_size();
    const double norm = half * half / (2.0 * std::numbers::pi * std::sqrt(reg.determinant()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Vec2 c = grid.center(cells[i]);
        double acc = 0.0;
        for (int a = 0; a < 8; ++a) {
            for (int b = 0; b < 8; ++b) {
                const Vec2 d = c + Vec2(half * gl_x[a], half * gl_x[b]) - mean;
                acc += gl_w[a] * gl_w[b] * std::exp(-0.5 * d.dot(inv * d));
            }
        }
        raw[i] = norm * acc;
    }
    return raw;
}

/// One row of the time-varying transition kernel: the distribution over an
/// admissible next set for a fixed source cell, action, and decision step.
struct TransitionRow {
    Cell source;
    int action = -1;
    int step = 0;
    std::vector<TargetProb> targets;   // aligned with the next-set order
    bool degenerate_uniform = false;   // set when all raw masses underflowed
};

/// Builds the transition row for taking `u` from cell `s` at time `t`: the
/// robot mean moves with the integrator plus the disturbance field evaluated
/// at the source center, the process noise spreads it, and the resulting
/// Gaussian is discretized onto `next_set` and renormalized there.
///
/// Diagonal noise uses exact per-axis CDF differences. A non-diagonal (but
/// positive-definite) covariance falls back to density-times-area weights,
/// which stay exact under renormalization in the limit of small cells.
/// If every raw mass underflows, the row degrades to uniform and says so.
inline TransitionRow transition_row(const Cell& s, const Vec2& u, double t,
                                    std::span<const Cell> next_set, const DisturbanceField& field,
                                    const NoiseModel& noise, const Grid& grid, double dt,
                                    int action = -1, int step = 0) {
    if (next_set.empty()) throw ConfigError("transition_row: next set is empty");

    TransitionRow row;
    row.source = s;
    row.action = action;
    row.step = step;
    row.targets.reserve(next_set.size());

    const Mat2& q = noise.covariance();
    if (noise.is_diagonal()) {
        if (!(q(0, 0) > 0.0) || !(q(1, 1) > 0.0)) {
            throw ConfigError("transition_row: noise covariance must be positive-definite");
        }
    } else if (!(q.determinant() > 0.0)) {
        throw ConfigError("transition_row: noise covariance must be positive-definite");
    }

    const Vec2 mean = step_robot(grid.center(s), u, t, field, dt);
    const std::vector<double> raw = gaussian_cell_masses(mean, q, next_set, grid);

    double total = 0.0;
    for (double v : raw) total += v;
    if (total < 1e-300) {
        row.degenerate_uniform = true;
        const double p = 1.0 / static_cast<double>(next_set.size());
        for (const Cell& c : next_set) row.targets.push_back({c, p});
        return row;
    }
    for (std::size_t i = 0; i < next_set.size(); ++i) {
        row.targets.push_back({next_set[i], raw[i] / total});
    }
    return row;
}

}  // namespace tvnav
