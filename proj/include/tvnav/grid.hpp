#pragma once

#include "tvnav/common.hpp"

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <vector>

namespace tvnav {

/// Index of one square cell of the planar state grid.
struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Uniform decision-time axis t_k = t0 + k * dt for k = 0..horizon.
struct TimeAxis {
    double t0 = 0.0;
    double dt = 0.5;
    int horizon = 4;

    [[nodiscard]] double at(int k) const { return t0 + k * dt; }
};

/// Uniform square-cell discretization of a rectangular workspace.
///
/// Cells are indexed from the origin corner; cell (i, j) covers
/// [origin + i*h, origin + (i+1)*h) x [origin + j*h, origin + (j+1)*h).
class Grid {
public:
    Grid(const Vec2& origin, const Vec2& extent, double cell_size)
        : origin_(origin), extent_(extent), h_(cell_size) {
        if (!(cell_size > 0.0)) throw ConfigError("grid: cell size must be positive");
        nx_ = axis_cells(extent.x(), "x");
        ny_ = axis_cells(extent.y(), "y");
    }

    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }
    [[nodiscard]] int cell_count() const { return nx_ * ny_; }
    [[nodiscard]] double cell_size() const { return h_; }
    [[nodiscard]] const Vec2& origin() const { return origin_; }
    [[nodiscard]] const Vec2& extent() const { return extent_; }
    [[nodiscard]] Vec2 max_corner() const { return origin_ + extent_; }
    [[nodiscard]] Box bounds() const { return Box{origin_, origin_ + extent_}; }

    [[nodiscard]] bool in_bounds(const Cell& c) const {
        return c.x >= 0 && c.x < nx_ && c.y >= 0 && c.y < ny_;
    }

    /// Maps a continuous position to its cell. Points exactly on a shared
    /// cell boundary go to the larger index; out-of-bounds positions clamp
    /// to the nearest boundary cell.
    [[nodiscard]] Cell discretize(const Vec2& p) const {
        return Cell{axis_index(p.x() - origin_.x(), nx_), axis_index(p.y() - origin_.y(), ny_)};
    }

    /// Center of a cell; the representative continuous state of the cell.
    [[nodiscard]] Vec2 center(const Cell& c) const {
        if (!in_bounds(c)) throw std::out_of_range("grid: cell index out of range");
        return origin_ + Vec2((c.x + 0.5) * h_, (c.y + 0.5) * h_);
    }

    /// Row-major linear id, y * nx + x. Used as a canonical sort key and as
    /// the key type of per-cell tables.
    [[nodiscard]] std::int32_t linear(const Cell& c) const {
        return static_cast<std::int32_t>(c.y) * nx_ + c.x;
    }

    [[nodiscard]] Cell from_linear(std::int32_t id) const {
        return Cell{static_cast<int>(id % nx_), static_cast<int>(id / nx_)};
    }

private:
    [[nodiscard]] int axis_cells(double extent, const char* name) const {
        const double n = extent / h_;
        const int rounded = static_cast<int>(std::lround(n));
        if (rounded < 1 || std::abs(n - rounded) > 1e-9 * std::max(1.0, std::abs(n))) {
            throw ConfigError(std::string("grid: extent along ") + name +
                              " is not a positive multiple of the cell size");
        }
        return rounded;
    }

    [[nodiscard]] int axis_index(double offset, int n) const {
        const int i = static_cast<int>(std::floor(offset / h_));
        return std::clamp(i, 0, n - 1);
    }

    Vec2 origin_;
    Vec2 extent_;
    double h_;
    int nx_;
    int ny_;
};

/// Symmetric velocity lattice: each axis sampled at `levels` equidistant
/// points spanning [-bound, +bound]; a single level collapses to zero.
/// Action index = ax * levels + ay with ax, ay the per-axis level indices.
class ActionSpace {
public:
    ActionSpace(int levels, double bound) : levels_(levels), bound_(bound) {
        if (levels < 1) throw ConfigError("actions: need at least one level per axis");
        if (!(bound >= 0.0)) throw ConfigError("actions: bound must be non-negative");
        axis_.reserve(levels);
        for (int j = 0; j < levels; ++j) axis_.push_back(level_value(j));
    }

    [[nodiscard]] int size() const { return levels_ * levels_; }
    [[nodiscard]] int levels() const { return levels_; }
    [[nodiscard]] double bound() const { return bound_; }

    [[nodiscard]] Vec2 value(int index) const {
        if (index < 0 || index >= size()) throw std::out_of_range("actions: index out of range");
        return Vec2(axis_[index / levels_], axis_[index % levels_]);
    }

    /// Nearest lattice action to a continuous velocity (componentwise).
    [[nodiscard]] int nearest(const Vec2& u) const {
        return nearest_level(u.x()) * levels_ + nearest_level(u.y());
    }

private:
    [[nodiscard]] double level_value(int j) const {
        if (levels_ == 1) return 0.0;
        return -bound_ + 2.0 * bound_ * j / (levels_ - 1);
    }

    [[nodiscard]] int nearest_level(double v) const {
        int best = 0;
        double best_d = std::abs(v - axis_[0]);
        for (int j = 1; j < levels_; ++j) {
            const double d = std::abs(v - axis_[j]);
            if (d < best_d) {
                best = j;
                best_d = d;
            }
        }
        return best;
    }

    int levels_;
    double bound_;
    std::vector<double> axis_;
};

}  // namespace tvnav

template <>
struct std::hash<tvnav::Cell> {
    std::size_t operator()(const tvnav::Cell& c) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                                          static_cast<std::uint32_t>(c.y));
    }
};
