#pragma once

// Closed-loop mission execution: forecasts are issued on a fixed cadence, the
// controller's value function is rebuilt from each one, and the feedback policy
// steers the vessel under the true currents while mass integrates along the way.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seafarm/dynamics.hpp"
#include "seafarm/errors.hpp"
#include "seafarm/field.hpp"
#include "seafarm/growth.hpp"
#include "seafarm/hj_solver.hpp"
#include "seafarm/mission.hpp"
#include "seafarm/policy.hpp"
#include "seafarm/scenarios.hpp"

namespace seafarm {

struct ForecastProvider {
    const FlowField* truth{nullptr};
    ErrorModel error{};
    double refresh_interval{kSecondsPerDay};
    double forecast_length{5.0 * kSecondsPerDay};
    std::uint64_t seed{0};
};

/// Truth over [t_issue, t_issue + length] (length defaults to the provider's
/// forecast length) plus the seeded error increment for this issue time.
inline FlowField issue_forecast(const ForecastProvider& provider, double t_issue,
                                std::optional<double> length = std::nullopt) {
    if (provider.truth == nullptr) throw InvalidArgument("forecast provider has no truth field");
    const FlowField& truth = *provider.truth;
    const double len = length.value_or(provider.forecast_length);
    if (!(len > 0.0)) throw InvalidArgument("forecast length must be positive");
    const TimeAxis& ta = truth.time();
    if (!ta.contains(t_issue) || !ta.contains(t_issue + len)) {
        throw InvalidArgument("forecast window exceeds truth coverage");
    }
    const TimeAxis axis = TimeAxis::covering(t_issue, t_issue + len, ta.dt());
    const FlowField window = resample(truth, truth.grid(), axis);
    if (provider.error.sigma0 == 0.0) {
        return window;
    }
    const FlowField err = make_error_field(window, provider.error, provider.seed, t_issue);
    std::vector<double> u(window.u().begin(), window.u().end());
    std::vector<double> v(window.v().begin(), window.v().end());
    for (std::size_t n = 0; n < u.size(); ++n) {
        u[n] += err.u()[n];
        v[n] += err.v()[n];
    }
    return FlowField(window.grid(), axis, std::move(u), std::move(v));
}

enum class ControllerKind { Floating, Greedy1h, Greedy5d, Longterm, LongtermDiscounted, Oracle };

inline std::string_view to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::Floating: return "floating";
        case ControllerKind::Greedy1h: return "greedy_1h";
        case ControllerKind::Greedy5d: return "greedy_5d";
        case ControllerKind::Longterm: return "longterm";
        case ControllerKind::LongtermDiscounted: return "longterm_discounted";
        case ControllerKind::Oracle: return "oracle";
    }
    return "unknown";
}

inline ControllerKind controller_kind_from_string(std::string_view s) {
    for (auto k : {ControllerKind::Floating, ControllerKind::Greedy1h, ControllerKind::Greedy5d,
                   ControllerKind::Longterm, ControllerKind::LongtermDiscounted, ControllerKind::Oracle}) {
        if (to_string(k) == s) return k;
    }
    throw InvalidArgument("unknown controller kind '" + std::string(s) + "'");
}

struct ControllerSpec {
    std::string name;  ///< label in reports; defaults to the kind
    ControllerKind kind{ControllerKind::Floating};
    std::optional<double> tau{};
    double planning_horizon{0.0};  ///< 0 means the mission horizon
    bool uses_avg_currents{false};
    std::optional<double> u_max{};  ///< overrides the mission's actuation bound

    std::string label() const { return name.empty() ? std::string(to_string(kind)) : name; }

    void validate() const {
        const bool longterm = kind == ControllerKind::Longterm || kind == ControllerKind::LongtermDiscounted;
        if (longterm && !uses_avg_currents) throw InvalidArgument(label() + ": longterm controllers need average currents");
        if (!longterm && uses_avg_currents) throw InvalidArgument(label() + ": only longterm controllers use average currents");
        if (kind == ControllerKind::LongtermDiscounted && !tau) throw InvalidArgument(label() + ": discounted controller needs tau");
        if ((kind == ControllerKind::Floating || kind == ControllerKind::Greedy1h) && tau) {
            throw InvalidArgument(label() + ": tau has no meaning for this controller");
        }
        if (tau && !(*tau > 0.0)) throw InvalidArgument(label() + ": tau must be positive");
        if (!(planning_horizon >= 0.0)) throw InvalidArgument(label() + ": planning horizon must be non-negative");
        if (u_max && !(*u_max >= 0.0)) throw InvalidArgument(label() + ": u_max must be non-negative");
    }
};

enum class Termination { Completed, ExitedDomain, Failed };

inline std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::ExitedDomain: return "exited_domain";
        case Termination::Failed: return "failed";
    }
    return "unknown";
}

struct MissionResult {
    std::uint64_t mission_id{0};
    std::string controller;
    std::vector<TimedPosition> trajectory;
    std::vector<TimedControl> controls;  ///< controls[n] is held over [trajectory[n].t, trajectory[n+1].t]
    std::vector<double> mass_trace;      ///< aligned with trajectory
    double final_mass{0.0};
    Termination termination{Termination::Completed};
    std::vector<double> replan_log;
    std::string diagnostic;
};

/// Shared, immutable inputs of a mission run.
struct SimulationContext {
    const FlowField* truth{nullptr};
    const FlowField* avg{nullptr};  ///< coarse block-averaged currents; held constant outside their span
    const GrowthModel* growth{nullptr};
    ForecastProvider provider{};
    double sim_step{600.0};
    double output_cadence{3600.0};
    double cfl{0.5};
    TimeIntegrator integrator{TimeIntegrator::Euler};
};

namespace detail {

class Planner {
public:
    Planner(const Mission& mission, const ControllerSpec& spec, const SimulationContext& ctx)
        : spec_(spec), ctx_(ctx) {
        cfg_.u_max = spec.u_max.value_or(mission.u_max);
        cfg_.cfl = ctx.cfl;
        cfg_.tau = spec.tau;
        cfg_.integrator = ctx.integrator;
        const double plan = spec.planning_horizon > 0.0 ? std::max(spec.planning_horizon, mission.horizon)
                                                        : mission.horizon;
        t_plan_end_ = mission.t0 + plan;

        if (spec.kind == ControllerKind::Oracle) {
            vf_ = solve_from_zero(*ctx.truth, *ctx.growth, ctx.truth->grid(), mission.t0, t_plan_end_, cfg_,
                                  ctx.output_cadence);
        } else if (uses_coarse()) {
            if (ctx.avg == nullptr) throw InvalidArgument("longterm controller needs average currents");
            coarse_ = solve_from_zero(TimeClampedFlow(*ctx.avg), *ctx.growth, ctx.avg->grid(), mission.t0,
                                      t_plan_end_, cfg_, ctx.output_cadence);
        }
    }

    double u_max() const { return cfg_.u_max; }

    bool needs_forecasts() const {
        return spec_.kind == ControllerKind::Greedy5d || uses_coarse();
    }

    /// Rebuilds the value function from a forecast issued at t.
    void replan(double t) {
        const FlowField& truth = *ctx_.truth;
        const double len = std::min(ctx_.provider.forecast_length, truth.time().t_end() - t);
        if (spec_.kind == ControllerKind::Greedy5d) {
            const FlowField fc = issue_forecast(ctx_.provider, t, len);
            vf_ = solve_from_zero(fc, *ctx_.growth, fc.grid(), t, t + len, cfg_, ctx_.output_cadence);
            return;
        }
        const double t_fc = std::min(t + len, t_plan_end_);
        const FlowField fc = issue_forecast(ctx_.provider, t, t_fc - t);
        const ScalarField terminal = transfer_slice(*coarse_, t_fc, fc.grid());
        vf_ = solve_backward(fc, *ctx_.growth, terminal, t, t_fc, cfg_,
                             TimeAxis::covering(t, t_fc, ctx_.output_cadence));
    }

    Control control(Vec2 x, double t) const {
        switch (spec_.kind) {
            case ControllerKind::Floating:
                return {};
            case ControllerKind::Greedy1h:
                // Growth-rate gradients are tiny in 1/(s·length); any nonzero slope steers.
                return steer_along(field_gradient(ctx_.growth->gross(), x, t), cfg_.u_max, 0.0);
            default:
                return feedback_control(*vf_, x, t, cfg_.u_max);
        }
    }

private:
    bool uses_coarse() const {
        return spec_.kind == ControllerKind::Longterm || spec_.kind == ControllerKind::LongtermDiscounted;
    }

    const ControllerSpec& spec_;
    const SimulationContext& ctx_;
    SolveConfig cfg_;
    double t_plan_end_{0.0};
    std::optional<ValueFunction> vf_;
    std::optional<ValueFunction> coarse_;
};

}  // namespace detail

inline MissionResult run_mission(const Mission& mission, const ControllerSpec& spec, const SimulationContext& ctx) {
    mission.validate();
    spec.validate();
    if (ctx.truth == nullptr || ctx.growth == nullptr) throw InvalidArgument("simulation context is incomplete");
    if (!(ctx.sim_step > 0.0)) throw InvalidArgument("sim_step must be positive");
    const FlowField& truth = *ctx.truth;
    if (!truth.grid().contains(mission.x0) || !truth.time().contains(mission.t0)) {
        throw InvalidArgument("mission start outside the truth domain");
    }
    if (!truth.time().contains(mission.t_end())) {
        throw InvalidArgument("truth currents end before the mission does");
    }

    MissionResult res;
    res.mission_id = mission.id;
    res.controller = spec.label();
    Vec2 x = mission.x0;
    double t = mission.t0;
    double m = mission.m0;
    res.trajectory.push_back({t, x});
    res.mass_trace.push_back(m);

    try {
        detail::Planner planner(mission, spec, ctx);
        const bool forecasts = planner.needs_forecasts();
        if (forecasts && !(ctx.provider.refresh_interval > 0.0 &&
                           ctx.provider.forecast_length >= ctx.provider.refresh_interval)) {
            throw InvalidArgument("forecasts must be refreshed before they run out");
        }
        const double T = mission.t_end();
        const double tol = 1e-9 * std::max(1.0, mission.horizon);
        double next_refresh = t;
        double rate = ctx.growth->rate(x, t);
        while (T - t > tol) {
            if (forecasts && t >= next_refresh - tol) {
                planner.replan(t);
                res.replan_log.push_back(t);
                while (next_refresh <= t + tol) next_refresh += ctx.provider.refresh_interval;
            }
            double h = std::min(ctx.sim_step, T - t);
            if (forecasts) h = std::min(h, next_refresh - t);
            const Control u = planner.control(x, t);
            const auto next = step_vessel(x, u, t, h, truth);
            if (!next) {
                res.termination = Termination::ExitedDomain;
                break;
            }
            const double t_next = (T - (t + h) <= tol) ? T : t + h;
            double next_rate = 0.0;
            try {
                next_rate = ctx.growth->rate(*next, t_next);
            } catch (const OutOfDomain&) {
                res.termination = Termination::ExitedDomain;
                break;
            }
            res.controls.push_back({t, u});
            m *= std::exp(0.5 * (t_next - t) * (rate + next_rate));
            x = *next;
            t = t_next;
            rate = next_rate;
            res.trajectory.push_back({t, x});
            res.mass_trace.push_back(m);
        }
    } catch (const SolverDiverged& e) {
        res.termination = Termination::Failed;
        res.diagnostic = e.what();
    }
    res.final_mass = m;
    return res;
}

}  // namespace seafarm
