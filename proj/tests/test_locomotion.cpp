#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "navloop/locomotion.hpp"
#include "navloop/rng.hpp"
#include "oracles.hpp"

using namespace navloop;

namespace {

int detector_steps(const std::vector<double>& h, const std::vector<double>& p, const LocomotionSettings& ls) {
    HeadBobState st;
    int steps = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        auto r = head_bob_step(st, h[i], p[i], ls);
        st = r.state;
        steps += r.stepDetected;
    }
    return steps;
}

Pose at(double x, double z, double yaw = 0.0) { return Pose::make({x, 0.0, z}, yaw); }

}  // namespace

TEST_CASE("teleop_step") {
    const auto ls = demo_locomotion();
    FrameInput in;
    in.hmd = Pose::make({}, 225.0);
    CHECK(teleop_step(Pose{}, in, ls, 0.5) == Vec3{});
    in.moveHeld = true;
    const Vec3 d = teleop_step(Pose{}, in, ls, 0.5);
    CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.x == doctest::Approx(-std::sqrt(2.0) / 2.0));
    CHECK(d.z == doctest::Approx(-std::sqrt(2.0) / 2.0));
    CHECK(d.y == 0.0);
    CHECK(teleop_step(Pose{}, in, ls, 0.5) == d);

    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        in.hmd = Pose::make({}, rng.uniform(0, 360), rng.uniform(-90, 90));
        const double dt = rng.uniform(0.001, 0.1);
        const Vec3 step = teleop_step(Pose{}, in, ls, dt);
        REQUIRE(step.norm() == doctest::Approx(ls.linearVelocity * dt).epsilon(1e-12));
        REQUIRE(step.y == 0.0);
    }
}

TEST_CASE("arm_swing_speed") {
    auto ls = demo_locomotion();
    const double dt = 1.0 / 90.0;
    const std::vector<Pose> still{at(0.2, 0), at(-0.2, 0)};
    CHECK(arm_swing_speed(still, still, ls, dt) == 0.0);

    SUBCASE("both controllers required") {
        ls.requireBothControllers = true;
        std::vector<Pose> oneMoves{at(0.2, 10 * ls.armSwingThreshold), at(-0.2, 0)};
        CHECK(arm_swing_speed(still, oneMoves, ls, dt) == 0.0);
        std::vector<Pose> both{at(0.2, 0.02), at(-0.2, -0.04)};
        // gain * mean(0.02, 0.04) / dt
        CHECK(arm_swing_speed(still, both, ls, dt) == doctest::Approx(0.03 / dt));
    }
    SUBCASE("either controller suffices") {
        ls.requireBothControllers = false;
        ls.armSwingGain = 1.5;
        std::vector<Pose> oneMoves{at(0.2, 2 * ls.armSwingThreshold), at(-0.2, 0)};
        // 1.5 * mean(0.01, 0) / dt = 0.675 m/s
        CHECK(arm_swing_speed(still, oneMoves, ls, dt) == doctest::Approx(1.5 * 0.005 / dt));
        CHECK(arm_swing_speed(still, oneMoves, ls, dt) == doctest::Approx(0.675));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(arm_swing_speed({}, {}, ls, dt), std::invalid_argument);
        CHECK_THROWS_AS(arm_swing_speed(still, std::vector<Pose>{at(0, 0)}, ls, dt), std::invalid_argument);
    }
    SUBCASE("swapping the controllers changes nothing") {
        Rng rng(8);
        for (int i = 0; i < 1000; ++i) {
            ls.requireBothControllers = rng.uniform() < 0.5;
            std::vector<Pose> prev{at(rng.uniform(-1, 1), rng.uniform(-1, 1)), at(rng.uniform(-1, 1), rng.uniform(-1, 1))};
            std::vector<Pose> curr{at(prev[0].position.x + rng.uniform(-0.02, 0.02), prev[0].position.z),
                                   at(prev[1].position.x, prev[1].position.z + rng.uniform(-0.02, 0.02))};
            const std::vector<Pose> prevSwapped{prev[1], prev[0]}, currSwapped{curr[1], curr[0]};
            REQUIRE(arm_swing_speed(prev, curr, ls, dt) == doctest::Approx(arm_swing_speed(prevSwapped, currSwapped, ls, dt)));
        }
    }
}

TEST_CASE("head bob: constant height never steps") {
    const auto ls = demo_locomotion();
    std::vector<double> h(900, 1.7), p(900, 0.0);
    CHECK(detector_steps(h, p, ls) == 0);
}

TEST_CASE("head bob: clean sinusoid gives two steps per period") {
    const auto ls = demo_locomotion();
    const double amp = 2.0 * ls.bobHeightThreshold;
    const int perPeriod = 60;  // 1.5 Hz at 90 Hz
    std::vector<double> h, p;
    for (int i = 0; i < perPeriod * 10; ++i) {
        h.push_back(1.7 + amp * std::sin(2.0 * std::numbers::pi * i / perPeriod + 0.3));
        p.push_back(0.0);
    }
    HeadBobState st;
    std::vector<int> perPeriodSteps(10, 0);
    for (std::size_t i = 0; i < h.size(); ++i) {
        auto r = head_bob_step(st, h[i], p[i], ls);
        st = r.state;
        perPeriodSteps[i / perPeriod] += r.stepDetected;
    }
    for (int k = 1; k < 10; ++k) CHECK(perPeriodSteps[static_cast<std::size_t>(k)] == 2);
    CHECK(detector_steps(h, p, ls) == oracle::head_bob_steps(h, p, ls.bobHeightThreshold, ls.pitchRejectThreshold));

    SUBCASE("pitch swinging with the bob suppresses every step") {
        std::vector<double> nod;
        for (int i = 0; i < perPeriod * 10; ++i)
            nod.push_back(30.0 * std::sin(2.0 * std::numbers::pi * i / perPeriod + 0.3));
        CHECK(detector_steps(h, nod, ls) == 0);
        CHECK(oracle::head_bob_steps(h, nod, ls.bobHeightThreshold, ls.pitchRejectThreshold) == 0);
    }
    SUBCASE("too shallow a bob never steps") {
        std::vector<double> shallow;
        for (double y : h) shallow.push_back(1.7 + (y - 1.7) * 0.2);  // peak-to-trough 0.024 < 0.03
        CHECK(detector_steps(shallow, p, ls) == 0);
    }
}

TEST_CASE("head bob: first flexion only primes") {
    const auto ls = demo_locomotion();
    // up, down: one flexion, no previous one
    std::vector<double> h{1.70, 1.75, 1.80, 1.75, 1.70};
    std::vector<double> p(h.size(), 0.0);
    CHECK(detector_steps(h, p, ls) == 0);
    // up, down, up: second flexion is 0.1 below the first
    h = {1.70, 1.75, 1.80, 1.75, 1.70, 1.75};
    p.assign(h.size(), 0.0);
    CHECK(detector_steps(h, p, ls) == 1);
}

TEST_CASE("head bob: pitch gate looks only at frames between the flexions") {
    const auto ls = demo_locomotion();
    // flexions at samples 2 (1.80) and 4 (1.70); a pitch jump on frame 5 is in the next bob
    std::vector<double> h{1.70, 1.75, 1.80, 1.75, 1.70, 1.75};
    std::vector<double> p{0, 0, 0, 0, 0, 10};
    CHECK(detector_steps(h, p, ls) == 1);
    p = {0, 0, 0, 10, 10, 10};  // jump on frame 3, inside the bob
    CHECK(detector_steps(h, p, ls) == 0);
    p = {0, 0, 10, 10, 10, 10};  // jump on frame 2 lands on the first flexion, outside the bob
    CHECK(detector_steps(h, p, ls) == 1);
}

TEST_CASE("head bob matches the offline flexion scan") {
    const auto ls = demo_locomotion();
    int total = 0;
    for (const auto& w : oracle::synthetic_waveforms(ls.bobHeightThreshold, ls.pitchRejectThreshold)) {
        INFO(w.label);
        const int expected = oracle::head_bob_steps(w.height, w.pitch, ls.bobHeightThreshold, ls.pitchRejectThreshold);
        CHECK(detector_steps(w.height, w.pitch, ls) == expected);
        total += expected;
    }
    CHECK(total > 0);
}

TEST_CASE("barrier visibility") {
    const SafeArea area{{}, 4.0, 4.0, 0.5};
    CHECK_FALSE(barrier_visible({0, 0, 0}, area));
    CHECK(barrier_visible({1.9, 0, 0}, area));
    CHECK(barrier_visible({0, 0, -1.9}, area));
    CHECK(barrier_visible({1.5, 0, 0}, area));
    CHECK_FALSE(barrier_visible({1.49, 0, 0}, area));
    CHECK(barrier_visible({3.0, 0, 0}, area));
}

TEST_CASE("physical walking") {
    const SafeArea area{{}, 4.0, 4.0, 0.5};

    SUBCASE("without the trigger real deltas pass through unchanged") {
        PhysicalWalkState st;
        Rng rng(4);
        Pose real = at(0.3, -0.2, 40.0);
        st.virtualPose = real;
        st = physical_walk_step(real, st, area, false).state;
        for (int i = 0; i < 500; ++i) {
            const Pose prevVirtual = st.virtualPose;
            const Pose prevReal = real;
            real = Pose::make({real.position.x + rng.uniform(-0.01, 0.01), 1.7, real.position.z + rng.uniform(-0.01, 0.01)},
                              real.yaw + rng.uniform(-3, 3));
            auto r = physical_walk_step(real, st, area, false);
            st = r.state;
            REQUIRE(r.virtualPose.position.x - prevVirtual.position.x ==
                    doctest::Approx(real.position.x - prevReal.position.x).epsilon(1e-9));
            REQUIRE(r.virtualPose.position.z - prevVirtual.position.z ==
                    doctest::Approx(real.position.z - prevReal.position.z).epsilon(1e-9));
            REQUIRE(r.virtualPose.yaw == doctest::Approx(real.yaw).epsilon(1e-9));
            REQUIRE(r.virtualPose.position.y == 0.0);
        }
    }

    SUBCASE("holding the trigger locks the view while turning") {
        PhysicalWalkState st;
        st.virtualPose = at(0, 0, 0);
        st = physical_walk_step(at(0, 0, 0), st, area, false).state;
        for (int deg = 10; deg <= 90; deg += 10) {
            auto r = physical_walk_step(at(0, 0, deg), st, area, true);
            st = r.state;
            CHECK(r.virtualPose.yaw == 0.0);
        }
        CHECK(st.lockedOffset == doctest::Approx(90.0));
        auto r = physical_walk_step(at(0, 0, 90), st, area, false);
        st = r.state;
        CHECK(r.virtualPose.yaw == doctest::Approx(0.0));
        // walking along real heading 90 moves along the pre-hold virtual heading 0
        r = physical_walk_step(at(1, 0, 90), st, area, false);
        CHECK(r.virtualPose.position.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.virtualPose.position.z == doctest::Approx(1.0));
        CHECK(r.lockedOffset == doctest::Approx(90.0));
    }

    SUBCASE("barrier near the edge") {
        PhysicalWalkState st;
        auto r = physical_walk_step(at(0, 0), st, area, false);
        CHECK_FALSE(r.barrierVisible);
        r = physical_walk_step(at(1.9, 0), r.state, area, false);
        CHECK(r.barrierVisible);
    }
}

TEST_CASE("teleport_resolve") {
    TeleportWorld world;
    SUBCASE("straight down") {
        const auto t = teleport_resolve({0, 1.5, 0}, {0, -1, 0}, world);
        CHECK(t.valid);
        CHECK(t.position == Vec3{0, 0, 0});
    }
    SUBCASE("upward or level aim misses the floor") {
        CHECK_FALSE(teleport_resolve({0, 1.5, 0}, {0, 1, 0}, world).valid);
        CHECK_FALSE(teleport_resolve({0, 1.5, 0}, {1, 0, 0}, world).valid);
        CHECK_FALSE(teleport_resolve({0, 1.5, 0}, aim_direction(0, 10), world).valid);
    }
    SUBCASE("collision disc") {
        world.collisionRegions.push_back({{0, 0, 2}, 0.5});
        CHECK_FALSE(teleport_resolve({0, 1.0, 0}, {0, -1, 2}, world).valid);
        CHECK(teleport_resolve({0, 1.0, 0}, {0, -1, 1}, world).valid);
    }
    SUBCASE("range and room footprint") {
        world.maxRange = 3.0;
        CHECK_FALSE(teleport_resolve({0, 1.0, 0}, {0, -1, 4}, world).valid);
        world.maxRange = 100.0;
        CHECK_FALSE(teleport_resolve({0, 1.0, 0}, {0, -1, 6}, world).valid);
    }
    SUBCASE("30 degrees down lands at height / tan 30") {
        const auto t = teleport_resolve({0, 1.5, 0}, aim_direction(90, -30), world);
        CHECK(t.valid);
        CHECK(t.position.x == doctest::Approx(1.5 / std::tan(std::numbers::pi / 6.0)));
        CHECK(t.position.z == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(teleport_resolve({0, 1.5, 0}, {0, 0, 0}, world), std::invalid_argument);
}

TEST_CASE("apply_teleport") {
    const Pose p = Pose::make({1, 0, 1}, 30.0, 5.0);
    const auto moved = apply_teleport(p, TeleportTarget{{2, 0, -1}, true});
    CHECK(moved.yaw == 30.0);
    CHECK(moved.pitch == 5.0);
    CHECK(moved.position == Vec3{2, 0, -1});
    CHECK(apply_teleport(p, TeleportTarget{p.position, true}) == p);
    CHECK_THROWS_AS(apply_teleport(p, TeleportTarget{{2, 0, -1}, false}), std::invalid_argument);
}
