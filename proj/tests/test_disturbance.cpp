#include "tvnav/disturbance.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace tvnav;
using Catch::Approx;

TEST_CASE("gyre field closed form", "[disturbance]") {
    GyreParams p{1.0, 10.0};

    CHECK(eval_gyre(Vec2(0, 0), p, 1.0) == Vec2(0, 0));

    Vec2 g = eval_gyre(Vec2(5.0, 0.0), p, 1.0);  // x = s/2
    CHECK(g.x() == Approx(-M_PI).margin(1e-12));
    CHECK(g.y() == Approx(0.0).margin(1e-12));

    g = eval_gyre(Vec2(10.0, 10.0), p, 1.0);  // x = (s, s)
    CHECK(g.x() == Approx(0.0).margin(1e-12));
    CHECK(g.y() == Approx(0.0).margin(1e-12));
}

TEST_CASE("gyre field is periodic with period 2s", "[disturbance]") {
    GyreParams p{0.5, 15.0};
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        Vec2 x(rng.uniform(-30, 30), rng.uniform(-30, 30));
        Vec2 a = eval_gyre(x, p, 0.5);
        Vec2 b = eval_gyre(x + Vec2(2 * p.size, 0), p, 0.5);
        CHECK((a - b).norm() < 1e-9);
    }
}

TEST_CASE("vortex field closed form", "[disturbance]") {
    VortexParams p{0.0, 0.0, Vec2(0, 0)};  // center pinned at the origin

    CHECK((eval_vortex(Vec2(1, 0), 0.0, p, 0.5) - Vec2(-0.5, 0)).norm() < 1e-12);

    SECTION("field vanishes at the vortex center") {
        VortexParams q{2.0, M_PI / 2, Vec2(5, 5)};
        const double t = 1.0;
        Vec2 c = vortex_center_at(q, t);
        CHECK((c - Vec2(5, 7)).norm() < 1e-12);
        CHECK(eval_vortex(c, t, q, 0.5).norm() < 1e-12);
    }
}

TEST_CASE("vortex field is affine in position at fixed time", "[disturbance]") {
    VortexParams p{5.0, 0.1, Vec2(15, 15)};
    Rng rng(22);
    for (int i = 0; i < 200; ++i) {
        Vec2 x1(rng.uniform(0, 30), rng.uniform(0, 30));
        Vec2 x2(rng.uniform(0, 30), rng.uniform(0, 30));
        double a = rng.uniform01();
        double t = rng.uniform(0, 100);
        Vec2 lhs = eval_vortex(a * x1 + (1 - a) * x2, t, p, 0.5);
        Vec2 rhs = a * eval_vortex(x1, t, p, 0.5) + (1 - a) * eval_vortex(x2, t, p, 0.5);
        CHECK((lhs - rhs).norm() < 1e-9);
    }
}

TEST_CASE("field dispatch", "[disturbance]") {
    DisturbanceField none;
    CHECK(eval_field(none, Vec2(3, 4), 1.0, 0.5) == Vec2(0, 0));

    DisturbanceField gyre{FieldKind::Gyre, GyreParams{0.5, 15.0}, {}};
    CHECK(eval_field(gyre, Vec2(0, 0), 1.0, 0.5) == Vec2(0, 0));

    DisturbanceField vortex{FieldKind::DynamicVortex, {}, VortexParams{2.0, 0.3, Vec2(1, 2)}};
    Vec2 c = vortex_center_at(vortex.vortex, 7.0);
    CHECK(eval_field(vortex, c, 7.0, 0.5).norm() < 1e-12);
}

TEST_CASE("zero covariance always samples zero", "[disturbance]") {
    NoiseModel zero{Mat2::Zero()};
    Rng rng(23);
    for (int i = 0; i < 100; ++i) CHECK(sample_noise(zero, rng) == Vec2(0, 0));
}

TEST_CASE("noise sampling matches its first two moments", "[disturbance]") {
    const int n = 100000;

    SECTION("identity covariance: mean near zero") {
        NoiseModel m{Mat2::Identity()};
        Rng rng(24);
        Vec2 sum = Vec2::Zero();
        for (int i = 0; i < n; ++i) sum += sample_noise(m, rng);
        Vec2 mean = sum / n;
        CHECK(std::abs(mean.x()) < 0.02);
        CHECK(std::abs(mean.y()) < 0.02);
    }

    SECTION("diag(4,1): sample variance within 5%") {
        Mat2 q = Mat2::Zero();
        q(0, 0) = 4.0;
        q(1, 1) = 1.0;
        NoiseModel m{q};
        Rng rng(25);
        Vec2 sum = Vec2::Zero(), sum2 = Vec2::Zero();
        for (int i = 0; i < n; ++i) {
            Vec2 s = sample_noise(m, rng);
            sum += s;
            sum2 += s.cwiseProduct(s);
        }
        Vec2 var = sum2 / n - (sum / n).cwiseProduct(sum / n);
        CHECK(var.x() == Approx(4.0).epsilon(0.05));
        CHECK(var.y() == Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("noise draws are reproducible for a fixed seed", "[disturbance]") {
    NoiseModel m{Mat2::Identity()};
    Rng a(77), b(77);
    for (int i = 0; i < 50; ++i) {
        Vec2 va = sample_noise(m, a);
        Vec2 vb = sample_noise(m, b);
        CHECK(va.x() == vb.x());
        CHECK(va.y() == vb.y());
    }
}

TEST_CASE("non-PSD covariance is rejected", "[disturbance]") {
    Mat2 q;
    q << 1.0, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(NoiseModel{q}, ConfigError);

    Mat2 asym;
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(NoiseModel{asym}, ConfigError);
}
