#pragma once

#include <optional>

#include "seafarm/field.hpp"

namespace seafarm {

/// Actuation command in length units per second.
struct Control {
    double ux{0.0};
    double uy{0.0};

    Vec2 vec() const { return {ux, uy}; }
    friend bool operator==(const Control&, const Control&) = default;
};

/// One classical RK4 step of dx/dt = v(x, t) + u with u held over the step.
/// Empty when any stage, or the end point, falls outside the flow's domain.
template <VelocitySource F>
std::optional<Vec2> step_vessel(Vec2 x, Control u, double t, double dt, const F& truth) {
    if (!(dt > 0.0)) {
        throw InvalidArgument("step must be positive");
    }
    const Vec2 uv = u.vec();
    try {
        const Vec2 k1 = truth.velocity(x, t) + uv;
        const Vec2 k2 = truth.velocity(x + (0.5 * dt) * k1, t + 0.5 * dt) + uv;
        const Vec2 k3 = truth.velocity(x + (0.5 * dt) * k2, t + 0.5 * dt) + uv;
        const Vec2 k4 = truth.velocity(x + dt * k3, t + dt) + uv;
        const Vec2 next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        (void)truth.velocity(next, t + dt);
        return next;
    } catch (const OutOfDomain&) {
        return std::nullopt;
    }
}

}  // namespace seafarm
