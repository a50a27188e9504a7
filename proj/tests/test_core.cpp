#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "navloop/core.hpp"
#include "navloop/rng.hpp"

using namespace navloop;

TEST_CASE("normalize_yaw") {
    CHECK(normalize_yaw(0.0) == 0.0);
    CHECK(normalize_yaw(-135.0) == 225.0);
    CHECK(normalize_yaw(725.0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(normalize_yaw(360.0) == 0.0);
    CHECK(normalize_yaw(-360.0) == 0.0);
    CHECK(normalize_yaw(-1e-20) < 360.0);
    CHECK_THROWS_AS(normalize_yaw(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK_THROWS_AS(normalize_yaw(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("normalize_yaw is idempotent and congruent") {
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.uniform(-1e5, 1e5);
        const double n = normalize_yaw(a);
        REQUIRE(n >= 0.0);
        REQUIRE(n < 360.0);
        REQUIRE(normalize_yaw(n) == n);
        const double k = (a - n) / 360.0;
        REQUIRE(std::abs(k - std::round(k)) < 1e-9);
    }
}

TEST_CASE("horizontal_distance") {
    CHECK(horizontal_distance({0, 0, 0}, {0, 5, 0}) == 0.0);
    CHECK(horizontal_distance({1, 0, 0}, {1, 0, 0}) == 0.0);
    // sqrt(7.5^2 + 5.5^2) = sqrt(86.5)
    CHECK(horizontal_distance({4.5, 0, 4.5}, {-3, 0, -1}) == doctest::Approx(9.30054).epsilon(1e-6));
    CHECK(horizontal_distance({4.5, 0, 4.5}, {-3, 0, -1}) == doctest::Approx(std::sqrt(86.5)).epsilon(1e-15));
}

TEST_CASE("horizontal_distance is a metric on random triples") {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 a{rng.uniform(-50, 50), rng.uniform(-5, 5), rng.uniform(-50, 50)};
        const Vec3 b{rng.uniform(-50, 50), rng.uniform(-5, 5), rng.uniform(-50, 50)};
        const Vec3 c{rng.uniform(-50, 50), rng.uniform(-5, 5), rng.uniform(-50, 50)};
        REQUIRE(horizontal_distance(a, b) >= 0.0);
        REQUIRE(horizontal_distance(a, b) == horizontal_distance(b, a));
        REQUIRE(horizontal_distance(a, c) <= horizontal_distance(a, b) + horizontal_distance(b, c) + 1e-12);
    }
}

TEST_CASE("pose construction normalizes yaw and clamps pitch") {
    const auto p = Pose::make({1, 2, 3}, -135.0, 120.0);
    CHECK(p.yaw == 225.0);
    CHECK(p.pitch == 90.0);
    CHECK(Pose::make({}, 0.0, -95.0).pitch == -90.0);
}

TEST_CASE("heading follows the left-handed convention") {
    const auto h0 = heading_vector(0.0);
    CHECK(h0.x == doctest::Approx(0.0));
    CHECK(h0.z == doctest::Approx(1.0));
    const auto h90 = heading_vector(90.0);
    CHECK(h90.x == doctest::Approx(1.0));
    CHECK(h90.z == doctest::Approx(0.0));
    // demo start faces the room centre
    const auto h = heading_vector(225.0);
    CHECK(h.x == doctest::Approx(-std::sqrt(0.5)));
    CHECK(h.z == doctest::Approx(-std::sqrt(0.5)));
    CHECK(yaw_towards({0, 0, 0}, {1, 0, 0}) == doctest::Approx(90.0));
    CHECK(yaw_towards({4.5, 0, 4.5}, {0, 0, 0}) == doctest::Approx(225.0));
}

TEST_CASE("validate_settings") {
    const auto env = demo_environment();
    const auto loco = demo_locomotion();
    const auto scen = demo_scenario();
    CHECK(validate_settings(env, loco, scen).empty());
    CHECK(env.roomWidth == 10.0);
    CHECK(env.roomDepth == 10.0);
    CHECK(scen.trialsPerBlock == std::vector<int>{15, 15});
    CHECK(scen.maxTrialDuration == 120.0);
    CHECK(scen.startPose.yaw == 225.0);

    SUBCASE("walls list shorter than the block list") {
        auto e = env;
        e.wallsPresentPerBlock = {true};
        CHECK(validate_settings(e, loco, scen).size() == 1);
    }
    SUBCASE("zero time cap") {
        auto s = scen;
        s.maxTrialDuration = 0.0;
        CHECK(validate_settings(env, loco, s).size() == 1);
    }
    SUBCASE("non-positive room") {
        auto e = env;
        e.roomWidth = 0.0;
        CHECK_FALSE(validate_settings(e, loco, scen).empty());
    }
    SUBCASE("negative threshold") {
        auto l = loco;
        l.bobHeightThreshold = -0.01;
        CHECK_FALSE(validate_settings(env, l, scen).empty());
    }
    SUBCASE("empty block list") {
        auto s = scen;
        s.trialsPerBlock.clear();
        CHECK_FALSE(validate_scenario(s).empty());
    }
    SUBCASE("zero scale factor") {
        auto s = scen;
        s.score.scaleFactor = 0.0;
        CHECK_FALSE(validate_scenario(s).empty());
    }
}

TEST_CASE("locomotion method names round-trip") {
    for (auto m : {LocomotionMethod::KeyboardTeleop, LocomotionMethod::ControllerTeleop, LocomotionMethod::ArmSwing,
                   LocomotionMethod::HeadBob, LocomotionMethod::PhysicalWalk, LocomotionMethod::Teleport}) {
        CHECK(locomotion_method_from_string(to_string(m)) == m);
    }
    CHECK_FALSE(locomotion_method_from_string("Jetpack").has_value());
}

TEST_CASE("rng is reproducible and forks distinct streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
    Rng c(42);
    const auto s1 = c.fork_seed();
    const auto s2 = c.fork_seed();
    CHECK(s1 != s2);
    Rng u(3);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
}
