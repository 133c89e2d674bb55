#pragma once

// Backward solver for the running-reward Hamilton–Jacobi–Bellman equation
//
//     -dJ/dt = max_{|u| <= u_max} [ grad J . (v(x,t) + u) ] + r(x,t)  (- J / tau)
//            = grad J . v + u_max |grad J| + r                          (- J / tau)
//
// with J(x, T) given. Space is discretised with a local Lax–Friedrichs numerical
// Hamiltonian over first-order one-sided differences; time steps are chosen per
// step from the CFL bound.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "seafarm/errors.hpp"
#include "seafarm/field.hpp"
#include "seafarm/growth.hpp"

namespace seafarm {

enum class TimeIntegrator { Euler, Rk2 };

struct SolveConfig {
    double u_max{0.0};
    double cfl{0.5};
    /// Discount time constant in seconds; empty means undiscounted.
    std::optional<double> tau{};
    TimeIntegrator integrator{TimeIntegrator::Euler};

    void validate() const {
        if (!(u_max >= 0.0) || !std::isfinite(u_max)) {
            throw InvalidArgument("u_max must be finite and non-negative");
        }
        if (!(cfl > 0.0 && cfl <= 1.0)) {
            throw InvalidArgument("cfl must lie in (0, 1]");
        }
        if (tau && (!(*tau > 0.0) || std::isnan(*tau))) {
            throw InvalidArgument("tau must be positive when present");
        }
    }
};

/// max over |u| <= u_max of grad . (v + u) + r.
inline double hamiltonian(Vec2 grad, Vec2 v, double u_max, double r) {
    if (!std::isfinite(grad.x) || !std::isfinite(grad.y) || !std::isfinite(v.x) || !std::isfinite(v.y) ||
        !std::isfinite(u_max) || !std::isfinite(r)) {
        throw InvalidArgument("hamiltonian inputs must be finite");
    }
    return dot(grad, v) + u_max * norm(grad) + r;
}

/// Largest stable explicit step for axis-wise characteristic speeds (u_max already
/// included). Empty when nothing propagates; callers then cap at their output step.
inline std::optional<double> cfl_timestep(double max_speed_x, double max_speed_y, const SpatialGrid& grid,
                                          double cfl) {
    if (!(max_speed_x >= 0.0) || !(max_speed_y >= 0.0)) {
        throw InvalidArgument("characteristic speeds must be non-negative");
    }
    const double rate = max_speed_x / grid.dx() + max_speed_y / grid.dy();
    if (rate == 0.0) {
        return std::nullopt;
    }
    return cfl / rate;
}

class ValueFunction {
public:
    ValueFunction(ScalarField slices, SolveConfig config)
        : slices_(std::move(slices)), config_(std::move(config)) {}

    const ScalarField& slices() const { return slices_; }
    const SpatialGrid& grid() const { return slices_.grid(); }
    const TimeAxis& time() const { return slices_.time(); }
    const SolveConfig& config() const { return config_; }
    double t_start() const { return slices_.time().t0(); }
    double t_end() const { return slices_.time().t_end(); }

    double value(Vec2 p, double t) const { return slices_.sample(p, t); }

    /// Copy with every value mapped to scale * J + shift.
    ValueFunction affine(double scale, double shift) const {
        std::vector<double> data(slices_.data().begin(), slices_.data().end());
        for (double& v : data) {
            v = scale * v + shift;
        }
        return ValueFunction(ScalarField(grid(), time(), std::move(data)), config_);
    }

private:
    ScalarField slices_;
    SolveConfig config_;
};

namespace detail {

struct NodeInputs {
    std::vector<double> vx;
    std::vector<double> vy;
    std::vector<double> r;
    double speed_x{0.0};  // max |vx| + u_max
    double speed_y{0.0};
};

template <VelocitySource F, RewardSource R>
void sample_inputs(const F& flow, const R& reward, const SpatialGrid& g, double t, double u_max, NodeInputs& in) {
    const std::size_t n = g.size();
    in.vx.resize(n);
    in.vy.resize(n);
    in.r.resize(n);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t idx = j * g.nx() + i;
            const Vec2 p = g.node(i, j);
            const Vec2 v = flow.velocity(p, t);
            in.vx[idx] = v.x;
            in.vy[idx] = v.y;
            in.r[idx] = reward.rate(p, t);
            mx = std::max(mx, std::abs(v.x));
            my = std::max(my, std::abs(v.y));
        }
    }
    in.speed_x = mx + u_max;
    in.speed_y = my + u_max;
}

// Local Lax–Friedrichs numerical Hamiltonian at every node. Edge nodes reuse the
// interior one-sided difference on the missing side, which is the gradient of a
// linearly extrapolated ghost value.
inline void numerical_hamiltonian(const std::vector<double>& J, const NodeInputs& in, const SpatialGrid& g,
                                  double u_max, std::vector<double>& out) {
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    const double inv_dx = 1.0 / g.dx();
    const double inv_dy = 1.0 / g.dy();
    out.resize(J.size());
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t c = j * nx + i;
            double pm = 0.0;
            double pp = 0.0;
            if (i > 0) pm = (J[c] - J[c - 1]) * inv_dx;
            if (i + 1 < nx) pp = (J[c + 1] - J[c]) * inv_dx;
            if (i == 0) pm = pp;
            if (i + 1 == nx) pp = pm;

            double qm = 0.0;
            double qp = 0.0;
            if (j > 0) qm = (J[c] - J[c - nx]) * inv_dy;
            if (j + 1 < ny) qp = (J[c + nx] - J[c]) * inv_dy;
            if (j == 0) qm = qp;
            if (j + 1 == ny) qp = qm;

            double ax = std::abs(in.vx[c]);
            if (i > 0) ax = std::max(ax, std::abs(in.vx[c - 1]));
            if (i + 1 < nx) ax = std::max(ax, std::abs(in.vx[c + 1]));
            double ay = std::abs(in.vy[c]);
            if (j > 0) ay = std::max(ay, std::abs(in.vy[c - nx]));
            if (j + 1 < ny) ay = std::max(ay, std::abs(in.vy[c + nx]));
            ax += u_max;
            ay += u_max;

            const double px = 0.5 * (pm + pp);
            const double py = 0.5 * (qm + qp);
            const double h = px * in.vx[c] + py * in.vy[c] + u_max * std::hypot(px, py) + in.r[c];
            out[c] = h + 0.5 * ax * (pp - pm) + 0.5 * ay * (qp - qm);
        }
    }
}

inline bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

/// Integrates the HJB equation backward from `T` (where J = terminal) to `t_start`
/// on the terminal's grid, storing J at every instant of `output`. The output axis
/// must start at t_start and end at T; internal steps land exactly on each instant.
template <VelocitySource F, RewardSource R>
ValueFunction solve_backward(const F& flow, const R& reward, const ScalarField& terminal, double t_start, double T,
                             const SolveConfig& config, const TimeAxis& output) {
    config.validate();
    if (!(T > t_start)) {
        throw InvalidArgument("solve window must have positive length");
    }
    if (terminal.time().nt() != 1) {
        throw InvalidArgument("terminal reward must be a single slice");
    }
    const double tol = 1e-9 * std::max(1.0, T - t_start);
    if (output.nt() < 2 || std::abs(output.t0() - t_start) > tol || std::abs(output.t_end() - T) > tol) {
        throw InvalidArgument("output time axis must span exactly [t_start, T]");
    }

    const SpatialGrid& g = terminal.grid();
    const std::size_t n = g.size();
    const std::size_t nt = output.nt();
    std::vector<double> slices(n * nt);
    std::vector<double> J(terminal.data().begin(), terminal.data().end());
    std::copy(J.begin(), J.end(), slices.begin() + static_cast<std::ptrdiff_t>((nt - 1) * n));

    detail::NodeInputs in;
    detail::NodeInputs in2;
    std::vector<double> hn;
    std::vector<double> stage;
    const std::optional<double> tau = config.tau;

    double t = T;
    for (std::size_t k = nt - 1; k-- > 0;) {
        const double target = (k == 0) ? t_start : output.time(k);
        while (t > target) {
            detail::sample_inputs(flow, reward, g, t, config.u_max, in);
            const double remaining = t - target;
            double dt = cfl_timestep(in.speed_x, in.speed_y, g, config.cfl).value_or(remaining);
            bool lands = false;
            if (dt >= remaining * (1.0 - 1e-12)) {
                dt = remaining;
                lands = true;
            }

            detail::numerical_hamiltonian(J, in, g, config.u_max, hn);
            if (config.integrator == TimeIntegrator::Euler) {
                if (tau) {
                    // Linear decay handled exactly over the step.
                    const double decay = std::exp(-dt / *tau);
                    const double gain = -*tau * std::expm1(-dt / *tau);
                    for (std::size_t c = 0; c < n; ++c) J[c] = decay * J[c] + gain * hn[c];
                } else {
                    for (std::size_t c = 0; c < n; ++c) J[c] += dt * hn[c];
                }
            } else {
                const double inv_tau = tau ? 1.0 / *tau : 0.0;
                stage.resize(n);
                for (std::size_t c = 0; c < n; ++c) stage[c] = J[c] + dt * (hn[c] - inv_tau * J[c]);
                const double t_next = lands ? target : t - dt;
                detail::sample_inputs(flow, reward, g, t_next, config.u_max, in2);
                detail::numerical_hamiltonian(stage, in2, g, config.u_max, hn);
                for (std::size_t c = 0; c < n; ++c) {
                    J[c] = 0.5 * (J[c] + stage[c] + dt * (hn[c] - inv_tau * stage[c]));
                }
            }
            t = lands ? target : t - dt;
            if (!detail::all_finite(J)) {
                throw SolverDiverged(t);
            }
        }
        std::copy(J.begin(), J.end(), slices.begin() + static_cast<std::ptrdiff_t>(k * n));
    }
    return ValueFunction(ScalarField(g, output, std::move(slices)), config);
}

template <VelocitySource F>
ValueFunction solve_backward(const F& flow, const ScalarField& growth, const ScalarField& terminal, double t_start,
                             double T, const SolveConfig& config, const TimeAxis& output) {
    return solve_backward(flow, FieldReward(growth), terminal, t_start, T, config, output);
}

/// Solve with J(x, T) = 0 and slices at most `cadence` seconds apart.
template <VelocitySource F, RewardSource R>
ValueFunction solve_from_zero(const F& flow, const R& reward, const SpatialGrid& grid, double t_start, double T,
                              const SolveConfig& config, double cadence = 3600.0) {
    const ScalarField terminal = ScalarField::constant(grid, TimeAxis::build(T, 1.0, 1), 0.0);
    return solve_backward(flow, reward, terminal, t_start, T, config, TimeAxis::covering(t_start, T, cadence));
}

/// Slice of `coarse` at time t, transferred onto `fine` as a single-slice field.
inline ScalarField transfer_slice(const ValueFunction& coarse, double t, const SpatialGrid& fine) {
    if (!coarse.grid().covers(fine)) {
        throw InvalidArgument("fine grid box must lie inside the coarse grid box");
    }
    return ScalarField::from_function(fine, TimeAxis::build(t, 1.0, 1),
                                      [&](double x, double y, double) { return coarse.value({x, y}, t); });
}

struct StitchConfig {
    SolveConfig solve{};
    double output_cadence{3600.0};
    bool discount_coarse{true};
    bool discount_fine{true};
};

/// Two-horizon value: a coarse solve over [T_fc, T_ext] from zero terminal reward,
/// whose T_fc slice becomes the terminal reward of a fine solve over [t_start, T_fc].
template <VelocitySource FC, RewardSource RC, VelocitySource FF, RewardSource RF>
ValueFunction stitch_long_horizon(const FC& avg_flow, const SpatialGrid& coarse_grid, const RC& growth_coarse,
                                  const FF& forecast_flow, const SpatialGrid& fine_grid, const RF& growth_fine,
                                  double t_start, double T_fc, double T_ext, const StitchConfig& cfg) {
    if (!(T_ext > T_fc)) {
        throw InvalidArgument("extended horizon must end after the forecast horizon");
    }
    if (!coarse_grid.covers(fine_grid)) {
        throw InvalidArgument("fine grid box must lie inside the coarse grid box");
    }
    SolveConfig coarse_cfg = cfg.solve;
    if (!cfg.discount_coarse) coarse_cfg.tau.reset();
    SolveConfig fine_cfg = cfg.solve;
    if (!cfg.discount_fine) fine_cfg.tau.reset();

    const ValueFunction coarse = solve_from_zero(avg_flow, growth_coarse, coarse_grid, T_fc, T_ext, coarse_cfg,
                                                 T_ext - T_fc);
    const ScalarField terminal = transfer_slice(coarse, T_fc, fine_grid);
    return solve_backward(forecast_flow, growth_fine, terminal, t_start, T_fc, fine_cfg,
                          TimeAxis::covering(t_start, T_fc, cfg.output_cadence));
}

/// Field-only form: grids come from the flow fields, growth from scalar fields.
inline ValueFunction stitch_long_horizon(const FlowField& avg_flow, const FlowField& forecast_flow,
                                         const ScalarField& growth_coarse, const ScalarField& growth_fine,
                                         double t_start, double T_fc, double T_ext, const StitchConfig& cfg) {
    return stitch_long_horizon(avg_flow, avg_flow.grid(), FieldReward(growth_coarse), forecast_flow,
                               forecast_flow.grid(), FieldReward(growth_fine), t_start, T_fc, T_ext, cfg);
}

struct EnvelopeReport {
    double max_excess{0.0};    ///< max over stored nodes of J_disc - J_plain
    double max_plain{0.0};     ///< max |J_plain|, for relative statements
    double max_rel_gap{0.0};   ///< max |J_disc - J_plain| / max_plain
};

inline EnvelopeReport discount_envelope_check(const ValueFunction& vf_disc, const ValueFunction& vf_plain) {
    if (!(vf_disc.grid() == vf_plain.grid()) || !(vf_disc.time() == vf_plain.time())) {
        throw InvalidArgument("value functions must share grid and time axis");
    }
    if (!vf_disc.config().tau) {
        throw InvalidArgument("first value function must be discounted");
    }
    EnvelopeReport rep;
    rep.max_excess = -std::numeric_limits<double>::infinity();
    const auto a = vf_disc.slices().data();
    const auto b = vf_plain.slices().data();
    double max_gap = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        rep.max_excess = std::max(rep.max_excess, a[c] - b[c]);
        rep.max_plain = std::max(rep.max_plain, std::abs(b[c]));
        max_gap = std::max(max_gap, std::abs(a[c] - b[c]));
    }
    rep.max_rel_gap = rep.max_plain > 0.0 ? max_gap / rep.max_plain : max_gap;
    return rep;
}

}  // namespace seafarm
