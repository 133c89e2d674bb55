#pragma once

// Feedback control from a value function: the Hamiltonian maximiser over the
// disc |u| <= u_max points along grad J.

#include <cmath>
#include <numbers>
#include <vector>

#include "seafarm/dynamics.hpp"
#include "seafarm/field.hpp"
#include "seafarm/growth.hpp"
#include "seafarm/hj_solver.hpp"

namespace seafarm {

/// Gradients at or below this norm (value units per length unit) yield zero control.
inline constexpr double kGradientEpsilon = 1e-10;

/// Commanded headings are snapped to multiples of this angle (radians).
inline constexpr double kHeadingResolution = 1.0 / 1048576.0;

namespace detail {

inline Vec2 node_gradient(const ScalarField& f, std::size_t k, std::size_t j, std::size_t i) {
    const SpatialGrid& g = f.grid();
    const std::size_t il = i > 0 ? i - 1 : i;
    const std::size_t ir = i + 1 < g.nx() ? i + 1 : i;
    const std::size_t jl = j > 0 ? j - 1 : j;
    const std::size_t jr = j + 1 < g.ny() ? j + 1 : j;
    const double gx = (f.at(k, j, ir) - f.at(k, j, il)) / (static_cast<double>(ir - il) * g.dx());
    const double gy = (f.at(k, jr, i) - f.at(k, jl, i)) / (static_cast<double>(jr - jl) * g.dy());
    return {gx, gy};
}

inline Vec2 bilinear_gradient(const ScalarField& f, std::size_t k, const Stencil& s) {
    const Vec2 g00 = node_gradient(f, k, s.j, s.i);
    const Vec2 g10 = node_gradient(f, k, s.j, s.i + 1);
    const Vec2 g01 = node_gradient(f, k, s.j + 1, s.i);
    const Vec2 g11 = node_gradient(f, k, s.j + 1, s.i + 1);
    const Vec2 lo = g00 + s.wx * (g10 - g00);
    const Vec2 hi = g01 + s.wx * (g11 - g01);
    return lo + s.wy * (hi - lo);
}

}  // namespace detail

/// Spatial gradient of a scalar field: central differences at nodes (one-sided at
/// edges), interpolated like the field itself.
inline Vec2 field_gradient(const ScalarField& f, Vec2 p, double t) {
    const Stencil s = locate(f.grid(), f.time(), p, t);
    const Vec2 a = detail::bilinear_gradient(f, s.k, s);
    if (f.time().nt() == 1 || s.wt == 0.0) {
        return a;
    }
    const Vec2 b = detail::bilinear_gradient(f, s.k + 1, s);
    return a + s.wt * (b - a);
}

inline Vec2 gradient_at(const ValueFunction& vf, Vec2 p, double t) { return field_gradient(vf.slices(), p, t); }

/// Full thrust along `direction`, or zero when its norm does not exceed `eps`.
inline Control steer_along(Vec2 direction, double u_max, double eps = kGradientEpsilon) {
    if (!(norm(direction) > eps) || u_max == 0.0) {
        return {};
    }
    const double heading = std::round(std::atan2(direction.y, direction.x) / kHeadingResolution) * kHeadingResolution;
    return {u_max * std::cos(heading), u_max * std::sin(heading)};
}

inline Control feedback_control(const ValueFunction& vf, Vec2 p, double t, double u_max) {
    return steer_along(gradient_at(vf, p, t), u_max);
}

inline Control feedback_control(const ValueFunction& vf, Vec2 p, double t) {
    return feedback_control(vf, p, t, vf.config().u_max);
}

struct TimedControl {
    double t{0.0};
    Control u{};
};

struct Rollout {
    std::vector<TimedPosition> positions;
    std::vector<TimedControl> controls;
    bool exited{false};
};

/// Rolls the feedback policy of `vf` forward under `truth` from (x0, t0) to T with
/// RK4 steps of at most `step` seconds, re-querying the policy every step. Stops
/// early, flagged as exited, when a step would leave the truth or value domain.
template <VelocitySource F>
Rollout open_loop_trajectory(const ValueFunction& vf, Vec2 x0, double t0, double T, const F& truth, double step) {
    if (!(step > 0.0) || !(T >= t0)) {
        throw InvalidArgument("rollout needs step > 0 and T >= t0");
    }
    Rollout out;
    out.positions.push_back({t0, x0});
    Vec2 x = x0;
    double t = t0;
    const double tol = 1e-9 * std::max(1.0, T - t0);
    while (T - t > tol) {
        const double h = std::min(step, T - t);
        const Control u = feedback_control(vf, x, t);
        const auto next = step_vessel(x, u, t, h, truth);
        if (!next || !vf.grid().contains(*next)) {
            out.exited = true;
            break;
        }
        out.controls.push_back({t, u});
        x = *next;
        t = (T - (t + h) <= tol) ? T : t + h;
        out.positions.push_back({t, x});
    }
    return out;
}

}  // namespace seafarm
