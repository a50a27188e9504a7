#pragma once

#include <span>
#include <vector>

#include "navloop/core.hpp"

namespace navloop {

// Per-tick locomotion models. Every function here is pure: state goes in and
// comes back out by value. Outputs keep the participant on the Y = 0 plane.

// --- teleoperation (keyboard and controller share this path) ---

// Displacement of linearVelocity*dt along the HMD heading while moveHeld.
Vec3 teleop_step(const Pose& pose, const FrameInput& input, const LocomotionSettings& settings, double dt);

// --- arm swing ---

// Forward speed from the per-frame displacement of the tracked controllers.
// Gated on both controllers exceeding armSwingThreshold when
// requireBothControllers, otherwise on any one of them. When gated on, speed is
// armSwingGain * mean(per-controller displacement) / dt.
// Throws std::invalid_argument for empty or mismatched controller lists.
double arm_swing_speed(std::span<const Pose> prevControllers, std::span<const Pose> currControllers,
                       const LocomotionSettings& settings, double dt);

// --- head bob ---

enum class BobDirection { Up, Down, Unknown };

struct HeadBobState {
    BobDirection direction = BobDirection::Unknown;
    double lastFlexionHeight = 0.0;
    bool hasFlexion = false;
    double lastHeight = 0.0;
    double lastPitch = 0.0;
    double maxPitchDelta = 0.0;  // largest per-frame pitch change since the last flexion sample
    bool primed = false;         // false until the first sample has been seen
    friend bool operator==(const HeadBobState&, const HeadBobState&) = default;
};

struct HeadBobResult {
    HeadBobState state;
    bool stepDetected = false;
};

// A flexion point is the height at which the vertical direction reverses. A
// step is reported at a flexion whose height differs from the previous flexion
// by more than bobHeightThreshold, unless the pitch changed by more than
// pitchRejectThreshold on any frame between the two flexions.
// The first flexion only primes the detector.
HeadBobResult head_bob_step(const HeadBobState& state, double hmdHeight, double hmdPitch,
                            const LocomotionSettings& settings);

// --- physical walking ---

struct SafeArea {
    Vec3 center;
    double width = 10.0;   // along X
    double depth = 10.0;   // along Z
    double barrierMargin = 0.5;
};

struct PhysicalWalkState {
    Pose lastReal;
    Pose virtualPose;
    double lockedOffset = 0.0;  // degrees of real rotation hidden from the virtual view
    bool primed = false;
    friend bool operator==(const PhysicalWalkState&, const PhysicalWalkState&) = default;
};

struct PhysicalWalkResult {
    Pose virtualPose;
    bool barrierVisible = false;
    double lockedOffset = 0.0;
    PhysicalWalkState state;
};

// True iff `p` is within barrierMargin of any safe-area edge (or outside it).
bool barrier_visible(const Vec3& p, const SafeArea& area);

// Maps real HMD motion to virtual motion. Position deltas are rotated by the
// current virtual-minus-real yaw (just -lockedOffset when the virtual pose was
// seeded with the real one); with triggerHeld the real yaw change is added to
// the offset instead of turning the virtual view. `state.virtualPose` must be
// seeded with the participant's virtual start pose.
PhysicalWalkResult physical_walk_step(const Pose& realPose, const PhysicalWalkState& state, const SafeArea& area,
                                      bool triggerHeld);

// --- teleportation ---

struct TeleportWorld {
    double roomWidth = 10.0;
    double roomDepth = 10.0;
    Vec3 roomCenter;
    std::vector<CollisionDisc> collisionRegions;
    double maxRange = 10.0;
};

struct TeleportTarget {
    Vec3 position;
    bool valid = false;
};

// Intersects the aim ray from `origin` with the Y = 0 plane. Invalid when the
// ray does not reach the floor, lands beyond maxRange (measured along the
// floor), leaves the room footprint or lands inside a collision disc.
// Throws std::invalid_argument for a zero aim direction.
TeleportTarget teleport_resolve(const Vec3& origin, const Vec3& aimDirection, const TeleportWorld& world);

// Moves to the target; heading is preserved. Throws std::invalid_argument
// when the target is invalid.
Pose apply_teleport(const Pose& pose, const TeleportTarget& target);

// Unit aim direction for a controller yaw/pitch (pitch > 0 looks up).
Vec3 aim_direction(double yawDeg, double pitchDeg);

}  // namespace navloop
