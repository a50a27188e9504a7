#pragma once

#include <string>

#include "navloop/core.hpp"
#include "navloop/rng.hpp"

namespace navloop {

// Fixed object shown at the goal (arrow, exclamation mark, ...).
struct StaticMarker {
    Vec3 position;
    std::string kind;
};

// Firefly goal cue. The fly flies toward a waypoint drawn uniformly (by area)
// from the disc around the goal, at most `stepSize` per tick, and draws a new
// waypoint once it arrives. Its long-run centroid sits over the goal.
struct FireflyState {
    Vec3 position;
    Vec3 targetSample;
    friend bool operator==(const FireflyState&, const FireflyState&) = default;
};

// Area-uniform point in the X-Z disc of `radius` around `goal`, height uniform
// in [minHeight, maxHeight]. Consumes exactly three uniforms.
Vec3 sample_firefly_point(const Vec3& goal, const FireflyParams& params, Rng& rng);

FireflyState firefly_init(const Vec3& goal, const FireflyParams& params, Rng& rng);

FireflyState firefly_advance(const FireflyState& state, const Vec3& goal, const FireflyParams& params, Rng& rng);

}  // namespace navloop
