#include <doctest.h>

#include "helpers.hpp"
#include "navloop/agents.hpp"

using namespace navloop;

TEST_CASE("GoalSeeker runs the demo session") {
    SessionOptions so;
    so.leaderboard = Leaderboard(default_fake_board(), LeaderboardMode::Fake);
    const auto s = run_agent_session(demo_settings(), testing::participant(), so, AgentPolicy{});
    CHECK(s.phase() == Phase::Ended);
    REQUIRE(s.records().size() == 30);
    int endKey = 0;
    for (const auto& r : s.records()) {
        CHECK_FALSE(r.frames.empty());
        endKey += r.endReason == EndReason::EndKey;
    }
    CHECK(endKey == 30);
    // TLX after each of the two blocks
    REQUIRE(s.responses().size() == 2);
    CHECK(s.responses()[0].surveyId == "nasa_tlx");
    CHECK(s.responses()[0].blockIndex == 0);
    CHECK(s.responses()[1].blockIndex == 1);
    const auto a = make_archive(s);
    CHECK(a.trials.size() == 30);
}

TEST_CASE("GoalSeeker estimate converges on the goal") {
    SessionOptions so;
    AgentPolicy policy;
    policy.observeTicks = 5000;
    policy.speedPreference = 0.0;
    policy.stopRadius = 0.05;
    auto settings = testing::small_settings({3});
    const auto s = run_agent_session(settings, testing::participant(), so, policy);
    for (const auto& r : s.records()) CHECK(r.residual < 0.3);
}

TEST_CASE("FlyChaser never presses end") {
    SessionOptions so;
    AgentPolicy policy;
    policy.kind = AgentKind::FlyChaser;
    auto settings = testing::small_settings({2});
    settings.scenario.maxTrialDuration = 5.0;
    const auto s = run_agent_session(settings, testing::participant(), so, policy);
    REQUIRE(s.records().size() == 2);
    for (const auto& r : s.records()) {
        CHECK(r.endReason == EndReason::Timeout);
        CHECK(r.elapsed == doctest::Approx(5.0).epsilon(1e-9));
    }
}

TEST_CASE("Scripted agent replays its frames") {
    AgentPolicy policy;
    policy.kind = AgentKind::Scripted;
    AgentState st(1);
    FrameInput a, b;
    a.moveHeld = true;
    b.endTrialPressed = true;
    policy.script = {a, b};
    const AgentObservation obs{Pose{}, Vec3{}, 0.0};
    CHECK(agent_act(policy, obs, st, 0.01).moveHeld);
    CHECK(agent_act(policy, obs, st, 0.01).endTrialPressed);
}

TEST_CASE("speed preference ordering") {
    const double time = speed_preference_for(ScoreConstants::time_group());
    const double acc = speed_preference_for(ScoreConstants::accuracy_group());
    CHECK(time > acc);
    CHECK(time >= 0.0);
    CHECK(time <= 1.0);
    CHECK(acc >= 0.0);
    AgentPolicy hurried, careful;
    hurried.speedPreference = time;
    careful.speedPreference = acc;
    CHECK(effective_observe_ticks(hurried) < effective_observe_ticks(careful));
}

TEST_CASE("cohorts are deterministic") {
    auto settings = testing::small_settings({2, 2});
    CohortOptions opts;
    opts.seed = 99;
    opts.fakeBoard = default_fake_board();
    AgentPolicy policy;
    policy.observeTicks = 90;
    const std::vector<CohortGroup> groups{{"time", ScoreConstants::time_group()},
                                          {"accuracy", ScoreConstants::accuracy_group()}};
    const auto a = run_cohort(3, groups, settings, policy, opts);
    opts.parallel = false;
    const auto b = run_cohort(3, groups, settings, policy, opts);
    REQUIRE(a.size() == 6);
    CHECK(a == b);
    CHECK(a[0].metadata.participant.id == "time_01");
    CHECK(a[5].metadata.participant.group == "accuracy");
    CHECK(a[0].scenario.rngSeed != a[1].scenario.rngSeed);
}

TEST_CASE("agent config round-trip") {
    AgentConfig c;
    c.policy.kind = AgentKind::FlyChaser;
    c.policy.observationNoise = 0.25;
    c.nPerGroup = 4;
    c.fakeBoard = default_fake_board();
    const auto text = serialize(c);
    const auto back = parse_agent_config(text);
    CHECK(serialize(back) == text);
    CHECK(back.policy.kind == AgentKind::FlyChaser);
    CHECK(back.groups.size() == 2);
    CHECK(back.fakeBoard == c.fakeBoard);
    const auto demo = read_file(std::filesystem::path(NAVLOOP_SOURCE_DIR) / "data" / "demo" / "agents.json");
    CHECK(serialize(parse_agent_config(demo)) == demo);
    CHECK_THROWS(parse_agent_config(R"({"policy":{"kind":"Wanderer"}})"));
    for (auto k : {AgentKind::GoalSeeker, AgentKind::FlyChaser, AgentKind::Scripted})
        CHECK(agent_kind_from_string(to_string(k)) == k);
}
