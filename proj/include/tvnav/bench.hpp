#pragma once

#include "tvnav/simulate.hpp"

#include <chrono>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace tvnav {

enum class SweepKind { Resolution, Range, Horizon };

inline const char* sweep_name(SweepKind kind) {
    switch (kind) {
        case SweepKind::Resolution: return "resolution";
        case SweepKind::Range: return "range";
        case SweepKind::Horizon: return "horizon";
    }
    throw ConfigError("bench: unknown sweep");
}

inline SweepKind parse_sweep(std::string_view name) {
    if (name == "resolution") return SweepKind::Resolution;
    if (name == "range") return SweepKind::Range;
    if (name == "horizon") return SweepKind::Horizon;
    throw ConfigError("bench: unknown sweep '" + std::string(name) +
                      "' (expected resolution, range, or horizon)");
}

enum class TimingStatus { Ok, TimedOut, Refused };

inline const char* timing_status_name(TimingStatus s) {
    switch (s) {
        case TimingStatus::Ok: return "ok";
        case TimingStatus::TimedOut: return "timed_out";
        case TimingStatus::Refused: return "refused";
    }
    throw ConfigError("bench: unknown status");
}

struct TimingEntry {
    PlannerKind planner = PlannerKind::Ours;
    double value = 0.0;
    double seconds = 0.0;
    int repetitions = 0;
    std::uint64_t sequences = 0;
    TimingStatus status = TimingStatus::Ok;
};

struct TimingTable {
    SweepKind sweep = SweepKind::Range;
    std::vector<TimingEntry> entries;
};

struct BenchOptions {
    /// A first run longer than this marks the entry timed-out and skips
    /// repetitions.
    double entry_time_cap_s = 600.0;
    /// Fast solves repeat until this much cumulative wall clock, for a
    /// stable mean.
    double min_measure_s = 0.2;
    int max_repetitions = 50;
    /// Fixed workspace for the resolution and horizon sweeps.
    double range_m = 20.0;
    /// Fixed cell size for the range and horizon sweeps.
    double cell_m = 1.0;
    /// Fixed horizon for the resolution and range sweeps.
    int horizon = 4;
    std::uint64_t ersi_cap = 10'000'000;
};

/// Obstacle- and agent-free planning instance on a square workspace with the
/// standard gyre; corner-to-corner task. The time budget is effectively
/// unlimited so the measurement reflects a full solve.
inline Scenario bench_scenario(double range_m, double cell_m, int horizon) {
    Scenario sc;
    sc.name = "bench";
    sc.grid_origin = Vec2::Zero();
    sc.grid_extent = Vec2(range_m, range_m);
    sc.cell_size = cell_m;
    sc.obstacles.clear();
    sc.robot_start = Vec2(0.5 * cell_m, 0.5 * cell_m);
    sc.robot_goal = Vec2(range_m - 0.5 * cell_m, range_m - 0.5 * cell_m);
    sc.agents.clear();
    sc.field.kind = FieldKind::Gyre;
    sc.field.gyre = GyreParams{0.5, 15.0};
    sc.planner.horizon = horizon;
    sc.planner.time_budget_s = 1e9;
    return sc;
}

/// One timed solve per (planner, sweep value) on the fixed setups:
/// resolution varies the cell size at constant range, range varies the
/// workspace at constant cells, horizon varies the number of decision steps.
inline TimingTable timing_benchmark(SweepKind sweep, std::span<const double> values,
                                    std::span<const PlannerKind> planners,
                                    const BenchOptions& opt = {}) {
    if (values.empty()) throw ConfigError("bench: need at least one sweep value");
    if (planners.empty()) throw ConfigError("bench: need at least one planner");

    TimingTable table;
    table.sweep = sweep;
    for (const PlannerKind planner : planners) {
        for (const double value : values) {
            Scenario sc;
            switch (sweep) {
                case SweepKind::Resolution: sc = bench_scenario(opt.range_m, value, opt.horizon); break;
                case SweepKind::Range: sc = bench_scenario(value, opt.cell_m, opt.horizon); break;
                case SweepKind::Horizon: {
                    const int horizon = static_cast<int>(std::lround(value));
                    if (horizon < 1 || std::abs(value - horizon) > 1e-9) {
                        throw ConfigError("bench: horizon sweep values must be positive integers");
                    }
                    sc = bench_scenario(opt.range_m, opt.cell_m, horizon);
                    break;
                }
            }
            sc.validate();
            const Grid grid = sc.make_grid();
            const ActionSpace actions = sc.make_actions();
            const RewardModel reward(grid, grid.discretize(sc.robot_goal), sc.reward);
            const PlanContext ctx{grid,      actions,      sc.field,
                                  sc.noise,  sc.obstacles, reward};
            const Cell start = grid.discretize(sc.robot_start);

            TimingEntry entry;
            entry.planner = planner;
            entry.value = value;

            auto solve = [&] {
                std::uint64_t sequences = 0;
                if (planner == PlannerKind::Ersi) {
                    ersi(start, 0.0, ctx, sc.planner, opt.ersi_cap, &sequences);
                } else {
                    detail::plan_with(planner, start, 0.0, ctx, sc.planner, opt.ersi_cap);
                }
                return sequences;
            };

            double total = 0.0;
            int reps = 0;
            bool refused = false;
            while (reps < opt.max_repetitions) {
                const auto wall0 = std::chrono::steady_clock::now();
                try {
                    entry.sequences = solve();
                } catch (const EnumerationLimitError&) {
                    refused = true;
                }
                total += std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
                ++reps;
                if (refused || total > opt.entry_time_cap_s || total >= opt.min_measure_s) break;
            }
            entry.repetitions = reps;
            entry.seconds = total / reps;
            if (refused) {
                entry.status = TimingStatus::Refused;
                entry.seconds = 0.0;
            } else if (total > opt.entry_time_cap_s) {
                entry.status = TimingStatus::TimedOut;
            }
            table.entries.push_back(entry);
        }
    }
    return table;
}

}  // namespace tvnav
