#include <doctest.h>

#include <cmath>

#include "navloop/goal_markers.hpp"

using namespace navloop;

namespace {

const Vec3 kGoal{-3.0, 0.0, -1.0};

void check_invariants(const FireflyState& s, const FireflyParams& p) {
    REQUIRE(horizontal_distance(s.position, kGoal) <= p.radius + p.stepSize + 1e-12);
    REQUIRE(s.position.y >= p.minHeight - p.stepSize - 1e-12);
    REQUIRE(s.position.y <= p.maxHeight + p.stepSize + 1e-12);
    REQUIRE(horizontal_distance(s.targetSample, kGoal) <= p.radius + 1e-12);
}

}  // namespace

TEST_CASE("firefly_init") {
    SUBCASE("zero radius sits over the goal") {
        Rng rng(1);
        const FireflyParams p{0.0, 0.75, 1.25, 0.005};
        const auto s = firefly_init(kGoal, p, rng);
        CHECK(s.position.x == kGoal.x);
        CHECK(s.position.z == kGoal.z);
        CHECK(s.position.y >= 0.75);
        CHECK(s.position.y <= 1.25);
    }
    SUBCASE("demo first block") {
        const auto p = demo_scenario().fireflyPerBlock[0];
        CHECK(p.radius == 0.75);
        CHECK(p.minHeight == 0.75);
        CHECK(p.maxHeight == 1.25);
        CHECK(p.stepSize == 0.005);
        Rng rng(2);
        for (int i = 0; i < 1000; ++i) {
            const auto s = firefly_init(kGoal, p, rng);
            REQUIRE(horizontal_distance(s.position, kGoal) <= 0.75);
            REQUIRE(s.position.y >= 0.75);
            REQUIRE(s.position.y <= 1.25);
        }
    }
    SUBCASE("same seed, same start") {
        Rng a(9), b(9);
        const FireflyParams p{1.5, 0.75, 1.25, 0.005};
        CHECK(firefly_init(kGoal, p, a) == firefly_init(kGoal, p, b));
    }
}

TEST_CASE("disc samples are uniform by area") {
    Rng rng(3);
    const FireflyParams p{1.5, 0.75, 1.25, 0.005};
    const int n = 200000;
    int inner = 0;
    for (int i = 0; i < n; ++i) {
        const Vec3 q = sample_firefly_point(kGoal, p, rng);
        inner += horizontal_distance(q, kGoal) <= 1.5 / std::sqrt(2.0);
    }
    // half the area lies inside r / sqrt(2); binomial sd is 0.0011
    CHECK(static_cast<double>(inner) / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("firefly_advance") {
    const FireflyParams p{1.5, 0.75, 1.25, 0.005};
    SUBCASE("arriving at the waypoint draws a new one") {
        Rng rng(4);
        FireflyState s{{-3.2, 1.0, -1.1}, {-3.2, 1.0, -1.1}};
        const auto next = firefly_advance(s, kGoal, p, rng);
        CHECK(next.targetSample != s.targetSample);
        CHECK((next.position - s.position).norm() <= p.stepSize + 1e-15);
    }
    SUBCASE("a far waypoint is approached by exactly one step") {
        Rng rng(5);
        FireflyState s{{-3.0, 1.0, -1.0}, {-2.0, 1.0, -1.0}};
        const auto next = firefly_advance(s, kGoal, p, rng);
        CHECK(next.position.x == doctest::Approx(-2.995));
        CHECK(next.targetSample == s.targetSample);
    }
    SUBCASE("10^5 advances stay contained and smooth") {
        Rng rng(6);
        auto s = firefly_init(kGoal, p, rng);
        double maxStep = 0.0;
        for (int i = 0; i < 100000; ++i) {
            const auto next = firefly_advance(s, kGoal, p, rng);
            maxStep = std::max(maxStep, (next.position - s.position).norm());
            s = next;
            check_invariants(s, p);
        }
        CHECK(maxStep <= 0.005 + 1e-15);
        CHECK(maxStep > 0.004);
    }
    SUBCASE("the long-run centroid sits over the goal") {
        for (double radius : {0.75, 1.5}) {
            const FireflyParams q{radius, 0.75, 1.25, 0.005};
            Rng rng(20200101);
            auto s = firefly_init(kGoal, q, rng);
            double sx = 0, sz = 0;
            const int n = 1000000;
            for (int i = 0; i < n; ++i) {
                s = firefly_advance(s, kGoal, q, rng);
                sx += s.position.x;
                sz += s.position.z;
            }
            CHECK(std::hypot(sx / n - kGoal.x, sz / n - kGoal.z) <= 0.05 * radius);
        }
    }
}

TEST_CASE("static marker is plain data") {
    const StaticMarker m{kGoal, "arrow"};
    CHECK(m.kind == "arrow");
    CHECK(m.position == kGoal);
}
