#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace navloop {

// World frame: left-handed, Y up, yaw about +Y in degrees. Yaw 0 faces +Z,
// yaw 90 faces +X. All lengths in meters, all times in seconds.

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend Vec3 operator*(double s, const Vec3& a) { return a * s; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

struct Pose {
    Vec3 position;
    double yaw = 0.0;    // [0, 360)
    double pitch = 0.0;  // [-90, 90]

    // Builds a pose with yaw normalized and pitch clamped.
    static Pose make(Vec3 position, double yaw, double pitch = 0.0);
    friend bool operator==(const Pose&, const Pose&) = default;
};

struct FrameInput {
    double timestamp = 0.0;  // seconds since trial start
    Pose hmd;
    std::vector<Pose> controllers;
    bool moveHeld = false;
    bool triggerHeld = false;
    bool endTrialPressed = false;
    bool skipPressed = false;
};

enum class LocomotionMethod { KeyboardTeleop, ControllerTeleop, ArmSwing, HeadBob, PhysicalWalk, Teleport };

std::string_view to_string(LocomotionMethod m);
std::optional<LocomotionMethod> locomotion_method_from_string(std::string_view s);

// Reward constants for R = beta1*exp(-alpha1*t) + beta2*exp(-alpha2*d).
struct ScoreConstants {
    double alpha1 = -0.05;  // 1/s
    double alpha2 = 0.2;    // 1/m
    double beta1 = -2.0;
    double beta2 = 6.2;
    double scaleFactor = 300.0;
    bool floorAtZero = true;

    static ScoreConstants time_group();
    static ScoreConstants accuracy_group();
    friend bool operator==(const ScoreConstants&, const ScoreConstants&) = default;
};

struct FireflyParams {
    double radius = 0.75;
    double minHeight = 0.75;
    double maxHeight = 1.25;
    double stepSize = 0.005;  // meters per tick
    friend bool operator==(const FireflyParams&, const FireflyParams&) = default;
};

// Obstacle footprint on the floor plane.
struct CollisionDisc {
    Vec3 center;
    double radius = 0.0;
    friend bool operator==(const CollisionDisc&, const CollisionDisc&) = default;
};

struct EnvironmentSettings {
    double roomWidth = 10.0;   // along X
    double roomDepth = 10.0;   // along Z
    double wallHeight = 4.0;
    std::vector<bool> wallsPresentPerBlock{true, false};
    std::vector<bool> floorExtendsToHorizon{false, true};
    bool lightsOn = true;
    bool soundOn = true;
    std::vector<std::string> surveyLinks{"nasa_tlx"};
    double safeAreaWidth = 10.0;
    double safeAreaDepth = 10.0;
    double barrierMargin = 0.5;
    std::vector<CollisionDisc> collisionRegions;
    friend bool operator==(const EnvironmentSettings&, const EnvironmentSettings&) = default;
};

struct LocomotionSettings {
    LocomotionMethod method = LocomotionMethod::ControllerTeleop;
    double linearVelocity = 2.0;        // m/s
    double rotationSpeed = 90.0;        // deg/s
    double bobHeightThreshold = 0.03;   // m
    double pitchRejectThreshold = 1.5;  // deg/frame
    double armSwingThreshold = 0.005;   // m/frame
    double armSwingGain = 1.0;          // forward speed per controller speed
    bool requireBothControllers = true;
    double teleportMaxRange = 10.0;     // m
    double stepHoldTime = 0.6;          // s of forward motion per detected head-bob step
    friend bool operator==(const LocomotionSettings&, const LocomotionSettings&) = default;
};

struct ScenarioSettings {
    std::vector<int> trialsPerBlock{15, 15};
    double maxTrialDuration = 120.0;
    Pose startPose = Pose::make({4.5, 0.0, 4.5}, -135.0);
    Vec3 goalPosition{-3.0, 0.0, -1.0};
    ScoreConstants score;
    std::vector<FireflyParams> fireflyPerBlock{FireflyParams{0.75, 0.75, 1.25, 0.005},
                                               FireflyParams{1.5, 0.75, 1.25, 0.005}};
    double feedbackDisplayDuration = 10.0;
    std::uint64_t rngSeed = 20200101;
    friend bool operator==(const ScenarioSettings&, const ScenarioSettings&) = default;

    int block_count() const { return static_cast<int>(trialsPerBlock.size()); }
    int total_trials() const;
};

// Demo configuration: 10 x 10 m room, 4 m walls removed for the second block,
// two blocks of 15 trials, 120 s cap, firefly radii 0.75 / 1.5 m.
EnvironmentSettings demo_environment();
LocomotionSettings demo_locomotion();
ScenarioSettings demo_scenario();

// Result is congruent to `angle` mod 360 and lies in [0, 360).
// Throws std::invalid_argument for non-finite input.
double normalize_yaw(double angle);

// Distance over the X-Z plane; Y is ignored.
double horizontal_distance(const Vec3& a, const Vec3& b);

// Unit heading on the floor plane for a yaw in degrees.
Vec3 heading_vector(double yawDeg);

// Yaw (degrees, [0,360)) that faces from `from` toward `to` on the floor plane.
double yaw_towards(const Vec3& from, const Vec3& to);

// Each entry describes one violation; an empty list means the settings are usable.
std::vector<std::string> validate_environment(const EnvironmentSettings& env);
std::vector<std::string> validate_locomotion(const LocomotionSettings& loco);
std::vector<std::string> validate_scenario(const ScenarioSettings& scen);
std::vector<std::string> validate_settings(const EnvironmentSettings& env, const LocomotionSettings& loco,
                                           const ScenarioSettings& scen);

}  // namespace navloop
