#include "navloop/core.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace navloop {

namespace {

constexpr std::array<std::pair<LocomotionMethod, std::string_view>, 6> kMethodNames{{
    {LocomotionMethod::KeyboardTeleop, "KeyboardTeleop"},
    {LocomotionMethod::ControllerTeleop, "ControllerTeleop"},
    {LocomotionMethod::ArmSwing, "ArmSwing"},
    {LocomotionMethod::HeadBob, "HeadBob"},
    {LocomotionMethod::PhysicalWalk, "PhysicalWalk"},
    {LocomotionMethod::Teleport, "Teleport"},
}};

bool velocity_based(LocomotionMethod m) {
    return m != LocomotionMethod::PhysicalWalk && m != LocomotionMethod::Teleport;
}

}  // namespace

std::string_view to_string(LocomotionMethod m) {
    for (const auto& [method, name] : kMethodNames) {
        if (method == m) return name;
    }
    return "Unknown";
}

std::optional<LocomotionMethod> locomotion_method_from_string(std::string_view s) {
    for (const auto& [method, name] : kMethodNames) {
        if (name == s) return method;
    }
    return std::nullopt;
}

Pose Pose::make(Vec3 position, double yaw, double pitch) {
    return Pose{position, normalize_yaw(yaw), std::clamp(pitch, -90.0, 90.0)};
}

ScoreConstants ScoreConstants::time_group() { return ScoreConstants{-0.05, 0.2, -2.0, 6.2, 300.0, true}; }

ScoreConstants ScoreConstants::accuracy_group() { return ScoreConstants{0.2, 1.0, 0.5, 3.4, 300.0, true}; }

int ScenarioSettings::total_trials() const { return std::accumulate(trialsPerBlock.begin(), trialsPerBlock.end(), 0); }

EnvironmentSettings demo_environment() { return EnvironmentSettings{}; }

LocomotionSettings demo_locomotion() { return LocomotionSettings{}; }

ScenarioSettings demo_scenario() { return ScenarioSettings{}; }

double normalize_yaw(double angle) {
    if (!std::isfinite(angle)) throw std::invalid_argument("normalize_yaw: non-finite angle");
    double r = std::fmod(angle, 360.0);
    if (r < 0.0) r += 360.0;
    // fmod of a tiny negative value can round back up to exactly 360
    if (r >= 360.0) r = 0.0;
    return r;
}

double horizontal_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.z - b.z); }

Vec3 heading_vector(double yawDeg) {
    const double rad = yawDeg * std::numbers::pi / 180.0;
    return {std::sin(rad), 0.0, std::cos(rad)};
}

double yaw_towards(const Vec3& from, const Vec3& to) {
    const double dx = to.x - from.x;
    const double dz = to.z - from.z;
    if (dx == 0.0 && dz == 0.0) return 0.0;
    return normalize_yaw(std::atan2(dx, dz) * 180.0 / std::numbers::pi);
}

std::vector<std::string> validate_environment(const EnvironmentSettings& env) {
    std::vector<std::string> v;
    if (!(env.roomWidth > 0.0)) v.emplace_back("environment.roomWidth must be > 0");
    if (!(env.roomDepth > 0.0)) v.emplace_back("environment.roomDepth must be > 0");
    if (!(env.wallHeight > 0.0)) v.emplace_back("environment.wallHeight must be > 0");
    if (!(env.safeAreaWidth > 0.0)) v.emplace_back("environment.safeAreaWidth must be > 0");
    if (!(env.safeAreaDepth > 0.0)) v.emplace_back("environment.safeAreaDepth must be > 0");
    if (!(env.barrierMargin >= 0.0)) v.emplace_back("environment.barrierMargin must be >= 0");
    if (env.wallsPresentPerBlock.empty()) v.emplace_back("environment.wallsPresentPerBlock must not be empty");
    for (std::size_t i = 0; i < env.collisionRegions.size(); ++i) {
        const auto& c = env.collisionRegions[i];
        if (!c.center.finite() || !(c.radius >= 0.0))
            v.push_back("environment.collisionRegions[" + std::to_string(i) + "] is malformed");
    }
    return v;
}

std::vector<std::string> validate_locomotion(const LocomotionSettings& loco) {
    std::vector<std::string> v;
    auto nonneg = [&](double value, const char* name) {
        if (!(value >= 0.0)) v.push_back(std::string("locomotion.") + name + " must be >= 0");
    };
    nonneg(loco.rotationSpeed, "rotationSpeed");
    nonneg(loco.bobHeightThreshold, "bobHeightThreshold");
    nonneg(loco.pitchRejectThreshold, "pitchRejectThreshold");
    nonneg(loco.armSwingThreshold, "armSwingThreshold");
    nonneg(loco.armSwingGain, "armSwingGain");
    nonneg(loco.teleportMaxRange, "teleportMaxRange");
    nonneg(loco.stepHoldTime, "stepHoldTime");
    if (velocity_based(loco.method) && !(loco.linearVelocity > 0.0))
        v.emplace_back("locomotion.linearVelocity must be > 0 for velocity-based methods");
    return v;
}

std::vector<std::string> validate_scenario(const ScenarioSettings& scen) {
    std::vector<std::string> v;
    if (scen.trialsPerBlock.empty()) v.emplace_back("scenario.trialsPerBlock must not be empty");
    for (std::size_t i = 0; i < scen.trialsPerBlock.size(); ++i) {
        if (scen.trialsPerBlock[i] <= 0)
            v.push_back("scenario.trialsPerBlock[" + std::to_string(i) + "] must be positive");
    }
    if (!(scen.maxTrialDuration > 0.0)) v.emplace_back("scenario.maxTrialDuration must be > 0");
    if (!(scen.feedbackDisplayDuration >= 0.0)) v.emplace_back("scenario.feedbackDisplayDuration must be >= 0");
    if (!scen.startPose.position.finite() || !scen.goalPosition.finite())
        v.emplace_back("scenario start/goal positions must be finite");
    if (!(scen.score.scaleFactor > 0.0)) v.emplace_back("scenario.score.scaleFactor must be > 0");
    if (scen.fireflyPerBlock.size() != scen.trialsPerBlock.size())
        v.emplace_back("scenario.fireflyPerBlock length must equal the block count");
    for (std::size_t i = 0; i < scen.fireflyPerBlock.size(); ++i) {
        const auto& f = scen.fireflyPerBlock[i];
        if (!(f.radius >= 0.0) || !(f.minHeight <= f.maxHeight) || !(f.stepSize > 0.0))
            v.push_back("scenario.fireflyPerBlock[" + std::to_string(i) + "] is malformed");
    }
    return v;
}

std::vector<std::string> validate_settings(const EnvironmentSettings& env, const LocomotionSettings& loco,
                                           const ScenarioSettings& scen) {
    auto report = validate_environment(env);
    auto l = validate_locomotion(loco);
    auto s = validate_scenario(scen);
    report.insert(report.end(), l.begin(), l.end());
    report.insert(report.end(), s.begin(), s.end());
    if (env.wallsPresentPerBlock.size() != scen.trialsPerBlock.size())
        report.emplace_back("environment.wallsPresentPerBlock length must equal the block count");
    if (!env.floorExtendsToHorizon.empty() && env.floorExtendsToHorizon.size() != scen.trialsPerBlock.size())
        report.emplace_back("environment.floorExtendsToHorizon length must equal the block count");
    return report;
}

}  // namespace navloop
