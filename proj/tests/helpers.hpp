#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "navloop/session.hpp"

namespace testing {

inline navloop::FrameInput idle_input(const navloop::Session& s, double dt) {
    navloop::FrameInput in;
    in.timestamp = s.state().trialClock + dt;
    in.hmd = navloop::Pose::make({s.state().pose.position.x, 1.7, s.state().pose.position.z}, s.state().pose.yaw);
    return in;
}

// Small session: `trials` per block, no surveys, 1 s feedback.
inline navloop::SessionSettings small_settings(std::vector<int> trials, bool surveys = false) {
    auto s = navloop::demo_settings();
    const auto blocks = trials.size();
    s.scenario.trialsPerBlock = std::move(trials);
    s.scenario.feedbackDisplayDuration = 1.0;
    s.environment.wallsPresentPerBlock.assign(blocks, true);
    s.environment.floorExtendsToHorizon.assign(blocks, false);
    s.scenario.fireflyPerBlock.assign(blocks, navloop::FireflyParams{});
    if (!surveys) s.environment.surveyLinks.clear();
    return s;
}

inline navloop::ParticipantInfo participant(std::string id = "P1", std::string group = "time") {
    return navloop::ParticipantInfo{std::move(id), 30, "f", "student", std::move(group)};
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("navloop-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testing
