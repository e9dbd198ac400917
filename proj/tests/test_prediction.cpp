#include "tvnav/prediction.hpp"

#include "tvnav/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <vector>

using namespace tvnav;

namespace {

TimeAxis axis_of(int horizon, double dt = 0.5, double t0 = 0.0) {
    TimeAxis a;
    a.t0 = t0;
    a.dt = dt;
    a.horizon = horizon;
    return a;
}

}  // namespace

TEST_CASE("no agents means no occupancy anywhere", "[prediction]") {
    Grid grid(Vec2(0, 0), Vec2(30, 30), 1.0);
    DisturbanceField none;
    NoiseModel q(Mat2::Identity());
    auto robot = make_belief(Vec2(5.5, 5.5), Mat2::Zero());

    auto pred = predict_other_vehicles({}, robot, SfmParams{}, axis_of(4), none, q, 0.95, grid,
                                       {});
    REQUIRE(pred.steps.size() == 5);
    for (const auto& step : pred.steps) CHECK(step.empty());
}

TEST_CASE("an agent resting at its goal stays put", "[prediction]") {
    Grid grid(Vec2(0, 0), Vec2(30, 30), 1.0);
    DisturbanceField none;
    NoiseModel q(1e-6 * Mat2::Identity());
    auto robot = make_belief(Vec2(25.5, 25.5), Mat2::Zero());

    AgentState agent;
    agent.position = Vec2(5.5, 5.5);
    agent.velocity = Vec2(0, 0);
    agent.goal = Vec2(5.5, 5.5);
    const std::vector<AgentState> agents = {agent};

    auto pred = predict_other_vehicles(agents, robot, SfmParams{}, axis_of(4), none, q, 0.95,
                                       grid, {});
    REQUIRE(pred.steps[1].size() == 1);
    CHECK(pred.steps[1][0].prob_at(Cell{5, 5}) >= 0.99);
}

TEST_CASE("prediction uncertainty grows with lookahead", "[prediction]") {
    Grid grid(Vec2(0, 0), Vec2(30, 30), 1.0);
    DisturbanceField field;
    field.kind = FieldKind::Gyre;
    NoiseModel q(0.5 * Mat2::Identity());
    auto robot = make_belief(Vec2(25.5, 25.5), Mat2::Zero());

    AgentState agent;
    agent.position = Vec2(8.5, 12.5);
    agent.velocity = Vec2(0.5, 0.0);
    agent.goal = Vec2(20.5, 12.5);
    const std::vector<AgentState> agents = {agent};

    auto pred = predict_other_vehicles(agents, robot, SfmParams{}, axis_of(4), field, q, 0.95,
                                       grid, {});
    const double tr1 = cov2(pred.beliefs[1][0]).trace();
    const double tr4 = cov2(pred.beliefs[4][0]).trace();
    CHECK(tr4 > tr1);
}

TEST_CASE("occupancy maps are normalized distributions over sorted cells", "[prediction]") {
    Grid grid(Vec2(0, 0), Vec2(30, 30), 1.0);
    DisturbanceField field;
    field.kind = FieldKind::Gyre;
    NoiseModel q(Mat2::Identity());
    auto robot = make_belief(Vec2(2.5, 2.5), Mat2::Zero());
    const std::vector<Box> obstacles = {Box{Vec2(14, 14), Vec2(18, 18)}};

    std::vector<AgentState> agents(3);
    agents[0] = {Vec2(10.5, 10.5), Vec2(1, 0), Vec2(25.5, 10.5)};
    agents[1] = {Vec2(20.5, 20.5), Vec2(0, -1), Vec2(20.5, 5.5)};
    agents[2] = {Vec2(5.5, 22.5), Vec2(0, 0), Vec2(5.5, 5.5)};

    auto pred = predict_other_vehicles(agents, robot, SfmParams{}, axis_of(4), field, q, 0.95,
                                       grid, obstacles);
    for (int k = 1; k <= 4; ++k) {
        REQUIRE(pred.steps[static_cast<std::size_t>(k)].size() == 3);
        for (const auto& map : pred.steps[static_cast<std::size_t>(k)]) {
            REQUIRE_FALSE(map.cells.empty());
            double sum = 0.0;
            std::int32_t prev = -1;
            for (const auto& t : map.cells) {
                CHECK(t.prob >= 0.0);
                CHECK(t.prob <= 1.0);
                CHECK(grid.linear(t.cell) > prev);
                prev = grid.linear(t.cell);
                CHECK_FALSE(cell_in_any_box(grid, t.cell, obstacles));
                sum += t.prob;
            }
            CHECK(sum == Catch::Approx(1.0).margin(1e-9));
        }
    }
}

TEST_CASE("prediction is a pure function of its inputs", "[prediction]") {
    Grid grid(Vec2(0, 0), Vec2(30, 30), 1.0);
    DisturbanceField field;
    field.kind = FieldKind::DynamicVortex;
    NoiseModel q(Mat2::Identity());
    auto robot = make_belief(Vec2(2.5, 2.5), Mat2::Zero());
    const std::vector<AgentState> agents = {{Vec2(10.5, 10.5), Vec2(1, 0), Vec2(25.5, 10.5)}};

    auto a = predict_other_vehicles(agents, robot, SfmParams{}, axis_of(4), field, q, 0.95, grid,
                                    {});
    auto b = predict_other_vehicles(agents, robot, SfmParams{}, axis_of(4), field, q, 0.95, grid,
                                    {});
    for (int k = 1; k <= 4; ++k) {
        REQUIRE(a.steps[static_cast<std::size_t>(k)].size() ==
                b.steps[static_cast<std::size_t>(k)].size());
        for (std::size_t i = 0; i < a.steps[static_cast<std::size_t>(k)].size(); ++i) {
            const auto& ma = a.steps[static_cast<std::size_t>(k)][i].cells;
            const auto& mb = b.steps[static_cast<std::size_t>(k)][i].cells;
            REQUIRE(ma.size() == mb.size());
            for (std::size_t j = 0; j < ma.size(); ++j) {
                CHECK(ma[j].cell == mb[j].cell);
                CHECK(ma[j].prob == mb[j].prob);
            }
        }
    }
}

TEST_CASE("landing rewards combine occupancy penalties and the goal bonus", "[prediction]") {
    Grid grid(Vec2(0, 0), Vec2(10, 10), 1.0);

    PredictionResult pred;
    pred.steps.resize(3);
    OccupancyMap m;
    m.cells = {{Cell{4, 4}, 1.0}};
    pred.steps[1].push_back(m);

    RewardModel reward(grid, Cell{8, 8}, pred);

    SECTION("certain collision costs the full penalty") {
        TransitionRow row;
        row.step = 0;
        row.targets = {{Cell{4, 4}, 1.0}};
        CHECK(step_reward(row, reward) == Catch::Approx(-100.0));
    }

    SECTION("empty cells collect nothing") {
        TransitionRow row;
        row.step = 0;
        row.targets = {{Cell{2, 7}, 1.0}};
        CHECK(step_reward(row, reward) == 0.0);
    }

    SECTION("reaching the goal earns the bonus") {
        TransitionRow row;
        row.step = 0;
        row.targets = {{Cell{8, 8}, 1.0}};
        CHECK(step_reward(row, reward) == Catch::Approx(100.0));
    }

    SECTION("steps without occupancy only know the goal") {
        TransitionRow row;
        row.step = 1;  // lands at step 2, which has no occupancy
        row.targets = {{Cell{4, 4}, 0.5}, {Cell{8, 8}, 0.5}};
        CHECK(step_reward(row, reward) == Catch::Approx(50.0));
    }
}

TEST_CASE("terminal shaping is the negative distance to the goal", "[prediction]") {
    Grid grid(Vec2(0, 0), Vec2(10, 10), 1.0);
    RewardConfig cfg;
    cfg.terminal_weight = 2.0;
    RewardModel reward(grid, Cell{8, 8}, cfg);
    CHECK(reward.terminal_value(Cell{8, 8}) == 0.0);
    CHECK(reward.terminal_value(Cell{8, 4}) == Catch::Approx(-8.0));
    CHECK(reward.terminal_value(Cell{5, 4}) == Catch::Approx(-10.0));
}

TEST_CASE("step reward matches a direct summation oracle", "[prediction]") {
    Grid grid(Vec2(0, 0), Vec2(10, 10), 1.0);
    Rng rng(515);
    const Cell goal{7, 2};

    for (int trial = 0; trial < 20; ++trial) {
        PredictionResult pred;
        pred.steps.resize(4);
        const int agents = 2;
        for (int k = 1; k <= 3; ++k) {
            for (int i = 0; i < agents; ++i) {
                OccupancyMap m;
                double total = 0.0;
                std::vector<double> w;
                std::vector<Cell> cs;
                for (int n = 0; n < 5; ++n) {
                    const Cell c{static_cast<int>(rng.uniform_int(10)),
                                 static_cast<int>(rng.uniform_int(10))};
                    bool dup = false;
                    for (const Cell& seen : cs) {
                        if (seen == c) dup = true;
                    }
                    if (dup) continue;
                    cs.push_back(c);
                    w.push_back(rng.uniform(0.1, 1.0));
                    total += w.back();
                }
                for (std::size_t n = 0; n < cs.size(); ++n) {
                    m.cells.push_back({cs[n], w[n] / total});
                }
                pred.steps[static_cast<std::size_t>(k)].push_back(std::move(m));
            }
        }
        RewardModel reward(grid, goal, pred);

        TransitionRow row;
        row.step = static_cast<int>(rng.uniform_int(3));
        double total = 0.0;
        for (int n = 0; n < 6; ++n) {
            const Cell c{static_cast<int>(rng.uniform_int(10)),
                         static_cast<int>(rng.uniform_int(10))};
            const double p = rng.uniform(0.0, 1.0);
            row.targets.push_back({c, p});
            total += p;
        }
        for (auto& t : row.targets) t.prob /= total;

        double expected = 0.0;
        for (const auto& t : row.targets) {
            double occupancy = 0.0;
            for (const auto& map : pred.steps[static_cast<std::size_t>(row.step) + 1]) {
                occupancy += map.prob_at(t.cell);
            }
            double r = occupancy * -100.0;
            if (t.cell == goal) r += 100.0;
            expected += t.prob * r;
        }
        CHECK(step_reward(row, reward) == Catch::Approx(expected).margin(1e-12));
    }
}
