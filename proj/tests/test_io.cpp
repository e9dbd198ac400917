#include "tvnav/io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace tvnav;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const char* name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove(p);
    return p;
}

Json minimal_doc() {
    Json doc;
    doc["version"] = 1;
    doc["grid"] = {{"extent_x_m", 10.0}, {"extent_y_m", 10.0}, {"cell_size_m", 1.0}};
    doc["robot"] = {{"start_x_m", 1.5}, {"start_y_m", 1.5}, {"goal_x_m", 8.5}, {"goal_y_m", 8.5}};
    return doc;
}

}  // namespace

TEST_CASE("bundled scenarios load and validate", "[io]") {
    const Scenario gyre = load_scenario(fs::path(TVNAV_SCENARIO_DIR) / "gyre_5agents.json");
    const Grid grid = gyre.make_grid();
    CHECK(grid.nx() == 30);
    CHECK(grid.ny() == 30);
    CHECK(gyre.obstacles.size() == 4);
    CHECK(gyre.agents.size() == 5);
    CHECK(gyre.field.kind == FieldKind::Gyre);
    CHECK(gyre.planner.horizon == 4);
    CHECK(gyre.planner.time_budget_s == 0.8);
    CHECK(gyre.stop_radius() == 0.5);

    const Scenario vortex = load_scenario(fs::path(TVNAV_SCENARIO_DIR) / "vortex_5agents.json");
    CHECK(vortex.field.kind == FieldKind::DynamicVortex);
    CHECK(vortex.field.vortex.radius == 1.0);
    CHECK(vortex.action_bound == 4.0);
}

TEST_CASE("config errors name the offending key", "[io]") {
    SECTION("missing cell size") {
        Json doc = minimal_doc();
        doc["grid"].erase("cell_size_m");
        CHECK_THROWS_WITH(scenario_from_json(doc), ContainsSubstring("grid.cell_size_m"));
    }
    SECTION("unknown top-level key") {
        Json doc = minimal_doc();
        doc["grdi"] = Json::object();
        CHECK_THROWS_WITH(scenario_from_json(doc), ContainsSubstring("unknown key 'grdi'"));
    }
    SECTION("unknown nested key") {
        Json doc = minimal_doc();
        doc["planner"]["alpa"] = 0.9;
        CHECK_THROWS_WITH(scenario_from_json(doc), ContainsSubstring("planner.alpa"));
    }
    SECTION("missing version") {
        Json doc = minimal_doc();
        doc.erase("version");
        CHECK_THROWS_WITH(scenario_from_json(doc), ContainsSubstring("version"));
    }
    SECTION("integer keys reject fractions") {
        Json doc = minimal_doc();
        doc["episode"]["step_cap"] = 10.5;
        CHECK_THROWS_WITH(scenario_from_json(doc), ContainsSubstring("step_cap"));
    }
    SECTION("goal inside an obstacle is a semantic error") {
        Json doc = minimal_doc();
        doc["obstacles"] = Json::array(
            {{{"min_x_m", 8.0}, {"min_y_m", 8.0}, {"max_x_m", 9.0}, {"max_y_m", 9.0}}});
        CHECK_THROWS_WITH(scenario_from_json(doc), ContainsSubstring("inside an obstacle"));
    }
}

TEST_CASE("parse failures report the line", "[io]") {
    const fs::path p = temp_file("tvnav_broken.json");
    {
        std::ofstream out(p);
        out << "{\n  \"version\": 1,\n  \"grid\": oops\n}\n";
    }
    CHECK_THROWS_WITH(load_scenario(p), ContainsSubstring("line 3"));
    fs::remove(p);
}

TEST_CASE("overrides are equivalent to editing the document", "[io]") {
    Json doc = minimal_doc();

    SECTION("numeric and string overrides") {
        apply_override(doc, "planner.alpha=0.99");
        apply_override(doc, "planner.kind=fhvi");
        apply_override(doc, "episode.seed=7");
        const Scenario sc = scenario_from_json(doc);
        CHECK(sc.planner.alpha == 0.99);
        CHECK(sc.planner_kind == PlannerKind::Fhvi);
        CHECK(sc.seed == 7);
    }
    SECTION("array element override") {
        doc["obstacles"] = Json::array(
            {{{"min_x_m", 4.0}, {"min_y_m", 4.0}, {"max_x_m", 5.0}, {"max_y_m", 5.0}}});
        apply_override(doc, "obstacles.0.max_x_m=6.0");
        const Scenario sc = scenario_from_json(doc);
        CHECK(sc.obstacles[0].hi.x() == 6.0);
    }
    SECTION("typo in an override path is caught by the strict parser") {
        apply_override(doc, "planner.alpa=0.9");
        CHECK_THROWS_WITH(scenario_from_json(doc), ContainsSubstring("planner.alpa"));
    }
    SECTION("malformed override") {
        CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
        doc["obstacles"] = Json::array(
            {{{"min_x_m", 4.0}, {"min_y_m", 4.0}, {"max_x_m", 5.0}, {"max_y_m", 5.0}}});
        CHECK_THROWS_AS(apply_override(doc, "obstacles.5.min_x_m=1"), ConfigError);
    }
}

TEST_CASE("trajectory files round-trip exactly", "[io]") {
    EpisodeResult result;
    Rng rng(2024);
    for (int i = 0; i < 6; ++i) {
        TrajectoryRecord rec;
        rec.step = i;
        rec.time_s = i * 0.5;
        rec.robot = Vec2(rng.uniform(-10, 30), rng.uniform(0, 1) / 3.0);
        rec.action = Vec2(rng.normal(), rng.normal() * 1e-17);
        rec.stopped = (i % 3) == 0 && i > 0;
        rec.agents = {Vec2(rng.normal() * 1e8, rng.uniform01()), Vec2(0.1, -0.3)};
        rec.plan_seconds = i == 0 ? 0.123456789123 : 0.0;
        result.steps.push_back(rec);
    }

    const fs::path p = temp_file("tvnav_traj.csv");

    SECTION("default columns") {
        write_trajectory(result, p);
        const ParsedTrajectory back = read_trajectory(p);
        CHECK_FALSE(back.has_plan_times);
        REQUIRE(back.steps.size() == result.steps.size());
        for (std::size_t i = 0; i < back.steps.size(); ++i) {
            CHECK(back.steps[i].step == result.steps[i].step);
            CHECK(back.steps[i].time_s == result.steps[i].time_s);
            CHECK(back.steps[i].robot == result.steps[i].robot);
            CHECK(back.steps[i].action == result.steps[i].action);
            CHECK(back.steps[i].stopped == result.steps[i].stopped);
            REQUIRE(back.steps[i].agents.size() == 2);
            CHECK(back.steps[i].agents[0] == result.steps[i].agents[0]);
            CHECK(back.steps[i].agents[1] == result.steps[i].agents[1]);
        }
    }
    SECTION("opt-in plan time column") {
        write_trajectory(result, p, true);
        const ParsedTrajectory back = read_trajectory(p);
        CHECK(back.has_plan_times);
        CHECK(back.steps[0].plan_seconds == result.steps[0].plan_seconds);
    }
    SECTION("empty results produce a header-only file") {
        write_trajectory(EpisodeResult{}, p);
        const ParsedTrajectory back = read_trajectory(p);
        CHECK(back.steps.empty());
        std::ifstream in(p);
        std::string line;
        int lines = 0;
        while (std::getline(in, line)) ++lines;
        CHECK(lines == 1);
    }
    fs::remove(p);
}

TEST_CASE("metrics and timing writers emit one row per entry", "[io]") {
    const fs::path p = temp_file("tvnav_table.csv");
    auto count_lines = [&] {
        std::ifstream in(p);
        std::string line;
        int n = 0;
        while (std::getline(in, line)) ++n;
        return n;
    };

    SECTION("metrics") {
        std::vector<MetricAggregate> rows(2);
        rows[0].planner = PlannerKind::Ours;
        rows[0].agent_count = 5;
        rows[1].planner = PlannerKind::Fhvi;
        rows[1].agent_count = 5;
        write_metrics(rows, p);
        CHECK(count_lines() == 3);
    }
    SECTION("timing: 4 planners x 4 values = 16 rows") {
        TimingTable table;
        table.sweep = SweepKind::Range;
        for (const PlannerKind planner :
             {PlannerKind::Ours, PlannerKind::Fhvi, PlannerKind::Ersi, PlannerKind::Pi}) {
            for (const double value : {10.0, 20.0, 30.0, 40.0}) {
                TimingEntry e;
                e.planner = planner;
                e.value = value;
                table.entries.push_back(e);
            }
        }
        write_timing(table, p);
        CHECK(count_lines() == 17);
    }
    fs::remove(p);
}
