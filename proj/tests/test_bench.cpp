#include "tvnav/bench.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <vector>

using namespace tvnav;

namespace {

BenchOptions fast_options() {
    BenchOptions opt;
    opt.min_measure_s = 0.0;  // one repetition is enough for unit tests
    opt.max_repetitions = 1;
    opt.range_m = 10.0;
    opt.horizon = 2;
    return opt;
}

}  // namespace

TEST_CASE("sweep and status names round-trip", "[bench]") {
    for (const SweepKind kind : {SweepKind::Resolution, SweepKind::Range, SweepKind::Horizon}) {
        CHECK(parse_sweep(sweep_name(kind)) == kind);
    }
    CHECK_THROWS_AS(parse_sweep("speed"), ConfigError);
    CHECK(timing_status_name(TimingStatus::Ok) == std::string("ok"));
}

TEST_CASE("timing table holds one entry per planner and value", "[bench]") {
    const std::vector<double> values = {5.0, 10.0};
    const std::vector<PlannerKind> planners = {PlannerKind::Ours, PlannerKind::Fhvi};
    const TimingTable table = timing_benchmark(SweepKind::Range, values, planners, fast_options());
    REQUIRE(table.entries.size() == 4);
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const TimingEntry& e = table.entries[i];
        CHECK(e.planner == planners[i / 2]);
        CHECK(e.value == values[i % 2]);
        CHECK(e.seconds >= 0.0);
        CHECK(e.repetitions == 1);
        CHECK(e.status == TimingStatus::Ok);
    }
}

TEST_CASE("enumeration counter reports the exact sequence count", "[bench]") {
    const std::vector<double> horizons = {1.0, 2.0};
    const std::vector<PlannerKind> planners = {PlannerKind::Ersi};
    const TimingTable table =
        timing_benchmark(SweepKind::Horizon, horizons, planners, fast_options());
    REQUIRE(table.entries.size() == 2);
    CHECK(table.entries[0].sequences == 9);
    CHECK(table.entries[1].sequences == 81);
}

TEST_CASE("oversized enumerations are refused, not attempted", "[bench]") {
    BenchOptions opt = fast_options();
    opt.ersi_cap = 50;
    const std::vector<double> horizons = {2.0};
    const std::vector<PlannerKind> planners = {PlannerKind::Ersi};
    const TimingTable table =
        timing_benchmark(SweepKind::Horizon, horizons, planners, opt);
    REQUIRE(table.entries.size() == 1);
    CHECK(table.entries[0].status == TimingStatus::Refused);
    CHECK(table.entries[0].seconds == 0.0);
}

TEST_CASE("a run past the time cap is marked timed out", "[bench]") {
    BenchOptions opt = fast_options();
    opt.entry_time_cap_s = 0.0;  // any real run exceeds a zero cap
    const std::vector<double> values = {5.0};
    const std::vector<PlannerKind> planners = {PlannerKind::Fhvi};
    const TimingTable table = timing_benchmark(SweepKind::Range, values, planners, opt);
    REQUIRE(table.entries.size() == 1);
    CHECK(table.entries[0].status == TimingStatus::TimedOut);
    CHECK(table.entries[0].repetitions == 1);
}

TEST_CASE("horizon sweep rejects fractional values", "[bench]") {
    const std::vector<double> horizons = {1.5};
    const std::vector<PlannerKind> planners = {PlannerKind::Ours};
    CHECK_THROWS_AS(timing_benchmark(SweepKind::Horizon, horizons, planners, fast_options()),
                    ConfigError);
}
