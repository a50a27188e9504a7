#include "navloop/goal_markers.hpp"

#include <cmath>
#include <numbers>

namespace navloop {

Vec3 sample_firefly_point(const Vec3& goal, const FireflyParams& params, Rng& rng) {
    const double r = params.radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    const double y = rng.uniform(params.minHeight, params.maxHeight);
    return {goal.x + r * std::cos(theta), y, goal.z + r * std::sin(theta)};
}

FireflyState firefly_init(const Vec3& goal, const FireflyParams& params, Rng& rng) {
    FireflyState s;
    s.position = sample_firefly_point(goal, params, rng);
    s.targetSample = sample_firefly_point(goal, params, rng);
    return s;
}

FireflyState firefly_advance(const FireflyState& state, const Vec3& goal, const FireflyParams& params, Rng& rng) {
    FireflyState next = state;
    const Vec3 delta = state.targetSample - state.position;
    const double dist = delta.norm();
    if (dist <= params.stepSize) {
        next.position = state.targetSample;
        next.targetSample = sample_firefly_point(goal, params, rng);
    } else {
        next.position = state.position + delta * (params.stepSize / dist);
    }
    return next;
}

}  // namespace navloop
