#include "navloop/locomotion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace navloop {

namespace {

// Signed smallest rotation from `from` to `to`, in (-180, 180].
double yaw_delta(double from, double to) {
    double d = std::fmod(to - from, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

Vec3 rotate_about_y(const Vec3& v, double deg) {
    const double rad = deg * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    return {v.x * c + v.z * s, v.y, v.z * c - v.x * s};
}

}  // namespace

Vec3 teleop_step(const Pose& /*pose*/, const FrameInput& input, const LocomotionSettings& settings, double dt) {
    if (!input.moveHeld) return {};
    return heading_vector(input.hmd.yaw) * (settings.linearVelocity * dt);
}

double arm_swing_speed(std::span<const Pose> prevControllers, std::span<const Pose> currControllers,
                       const LocomotionSettings& settings, double dt) {
    if (currControllers.empty()) throw std::invalid_argument("arm_swing_speed: no controllers");
    if (prevControllers.size() != currControllers.size())
        throw std::invalid_argument("arm_swing_speed: controller count changed between frames");
    if (!(dt > 0.0)) throw std::invalid_argument("arm_swing_speed: dt must be positive");

    double sum = 0.0;
    std::size_t above = 0;
    for (std::size_t i = 0; i < currControllers.size(); ++i) {
        const double disp = (currControllers[i].position - prevControllers[i].position).norm();
        sum += disp;
        if (disp > settings.armSwingThreshold) ++above;
    }
    const bool gated = settings.requireBothControllers ? above == currControllers.size() : above > 0;
    if (!gated) return 0.0;
    return settings.armSwingGain * (sum / static_cast<double>(currControllers.size())) / dt;
}

HeadBobResult head_bob_step(const HeadBobState& state, double hmdHeight, double hmdPitch,
                            const LocomotionSettings& settings) {
    HeadBobResult out{state, false};
    HeadBobState& s = out.state;
    if (!s.primed) {
        s.primed = true;
        s.lastHeight = hmdHeight;
        s.lastPitch = hmdPitch;
        s.maxPitchDelta = 0.0;
        return out;
    }

    const double pitchDelta = std::abs(hmdPitch - s.lastPitch);

    BobDirection dir = s.direction;
    if (hmdHeight > s.lastHeight) dir = BobDirection::Up;
    else if (hmdHeight < s.lastHeight) dir = BobDirection::Down;

    if (s.direction != BobDirection::Unknown && dir != s.direction) {
        // The previous sample was the turning point.
        const double flexion = s.lastHeight;
        if (s.hasFlexion) {
            const bool tall = std::abs(flexion - s.lastFlexionHeight) > settings.bobHeightThreshold;
            const bool steady = s.maxPitchDelta <= settings.pitchRejectThreshold;
            out.stepDetected = tall && steady;
        }
        s.lastFlexionHeight = flexion;
        s.hasFlexion = true;
        // This frame already belongs to the next bob.
        s.maxPitchDelta = pitchDelta;
    } else {
        s.maxPitchDelta = std::max(s.maxPitchDelta, pitchDelta);
    }
    s.direction = dir;
    s.lastHeight = hmdHeight;
    s.lastPitch = hmdPitch;
    return out;
}

bool barrier_visible(const Vec3& p, const SafeArea& area) {
    const double dx = area.width / 2.0 - std::abs(p.x - area.center.x);
    const double dz = area.depth / 2.0 - std::abs(p.z - area.center.z);
    return std::min(dx, dz) <= area.barrierMargin;
}

PhysicalWalkResult physical_walk_step(const Pose& realPose, const PhysicalWalkState& state, const SafeArea& area,
                                      bool triggerHeld) {
    PhysicalWalkState next = state;
    if (!next.primed) {
        next.primed = true;
    } else {
        const double dyaw = yaw_delta(state.lastReal.yaw, realPose.yaw);
        if (triggerHeld) next.lockedOffset = normalize_yaw(next.lockedOffset + dyaw);
        if (!triggerHeld) next.virtualPose.yaw = normalize_yaw(next.virtualPose.yaw + dyaw);
        // Real motion is carried into the virtual frame by the current yaw
        // difference; -lockedOffset when the two started aligned.
        Vec3 delta = realPose.position - state.lastReal.position;
        delta.y = 0.0;
        next.virtualPose.position += rotate_about_y(delta, yaw_delta(realPose.yaw, next.virtualPose.yaw));
        next.virtualPose.position.y = 0.0;
        next.virtualPose.pitch = realPose.pitch;
    }
    next.lastReal = realPose;

    PhysicalWalkResult out;
    out.virtualPose = next.virtualPose;
    out.barrierVisible = barrier_visible(realPose.position, area);
    out.lockedOffset = next.lockedOffset;
    out.state = next;
    return out;
}

Vec3 aim_direction(double yawDeg, double pitchDeg) {
    const double p = pitchDeg * std::numbers::pi / 180.0;
    const Vec3 h = heading_vector(yawDeg);
    return {h.x * std::cos(p), std::sin(p), h.z * std::cos(p)};
}

TeleportTarget teleport_resolve(const Vec3& origin, const Vec3& aimDirection, const TeleportWorld& world) {
    if (aimDirection.norm() == 0.0) throw std::invalid_argument("teleport_resolve: zero aim direction");
    TeleportTarget target;
    if (!(aimDirection.y < 0.0) || origin.y < 0.0) return target;

    const double s = -origin.y / aimDirection.y;
    Vec3 hit = origin + aimDirection * s;
    hit.y = 0.0;
    target.position = hit;

    if (horizontal_distance(origin, hit) > world.maxRange) return target;
    if (std::abs(hit.x - world.roomCenter.x) > world.roomWidth / 2.0) return target;
    if (std::abs(hit.z - world.roomCenter.z) > world.roomDepth / 2.0) return target;
    for (const auto& disc : world.collisionRegions) {
        if (horizontal_distance(hit, disc.center) <= disc.radius) return target;
    }
    target.valid = true;
    return target;
}

Pose apply_teleport(const Pose& pose, const TeleportTarget& target) {
    if (!target.valid) throw std::invalid_argument("apply_teleport: invalid target");
    Pose out = pose;
    out.position = target.position;
    out.position.y = 0.0;
    return out;
}

}  // namespace navloop
