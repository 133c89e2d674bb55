#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "seafarm/errors.hpp"
#include "seafarm/field.hpp"

namespace seafarm {

inline constexpr double kSecondsPerDay = 86400.0;

/// Converts a rate quoted per day into per second.
constexpr double per_day(double rate) { return rate / kSecondsPerDay; }

/// Net growth rate model: gross growth (optionally gated by a square-wave light
/// cycle) minus a continuous respiration rate. Rates are in 1/s.
class GrowthModel {
public:
    GrowthModel(ScalarField gross, double resp_rate, bool diurnal = false, double day_length = kSecondsPerDay,
                double light_fraction = 1.0)
        : gross_(std::move(gross)),
          resp_rate_(resp_rate),
          diurnal_(diurnal),
          day_length_(day_length),
          light_fraction_(light_fraction) {
        if (!(resp_rate_ >= 0.0) || !std::isfinite(resp_rate_)) {
            throw InvalidArgument("respiration rate must be finite and non-negative");
        }
        if (!(light_fraction_ > 0.0 && light_fraction_ <= 1.0)) {
            throw InvalidArgument("light fraction must lie in (0, 1]");
        }
        if (!(day_length_ > 0.0)) {
            throw InvalidArgument("day length must be positive");
        }
    }

    const ScalarField& gross() const { return gross_; }
    double resp_rate() const { return resp_rate_; }
    bool diurnal() const { return diurnal_; }
    double day_length() const { return day_length_; }
    double light_fraction() const { return light_fraction_; }

    /// 1 while photosynthesis is active, else 0. Days start lit at t = 0 (mod day_length).
    double light(double t) const {
        if (!diurnal_) {
            return 1.0;
        }
        const double phase = t - std::floor(t / day_length_) * day_length_;
        return phase < light_fraction_ * day_length_ ? 1.0 : 0.0;
    }

    double rate(Vec2 p, double t) const { return gross_.sample(p, t) * light(t) - resp_rate_; }

private:
    ScalarField gross_;
    double resp_rate_;
    bool diurnal_;
    double day_length_;
    double light_fraction_;
};

inline double growth_factor(const GrowthModel& gm, Vec2 p, double t) { return gm.rate(p, t); }

/// Anything that reports a running reward rate at (x, t).
template <class R>
concept RewardSource = requires(const R& r, Vec2 p, double t) {
    { r.rate(p, t) } -> std::convertible_to<double>;
};

/// Adapts a plain scalar field to a reward source.
class FieldReward {
public:
    explicit FieldReward(const ScalarField& field) : field_(&field) {}
    double rate(Vec2 p, double t) const { return field_->sample(p, t); }
    const ScalarField& field() const { return *field_; }

private:
    const ScalarField* field_;
};

struct TimedPosition {
    double t{0.0};
    Vec2 p{};
};

/// Mass along a trajectory: each step multiplies by exp of the trapezoid-rule
/// integral of the growth factor between consecutive samples.
template <RewardSource R>
std::vector<double> integrate_mass(const R& growth, std::span<const TimedPosition> trajectory, double m0) {
    if (!(m0 > 0.0)) {
        throw InvalidArgument("initial mass must be positive");
    }
    std::vector<double> mass;
    mass.reserve(trajectory.size());
    if (trajectory.empty()) {
        return mass;
    }
    mass.push_back(m0);
    double prev_rate = growth.rate(trajectory[0].p, trajectory[0].t);
    for (std::size_t n = 1; n < trajectory.size(); ++n) {
        const double h = trajectory[n].t - trajectory[n - 1].t;
        if (h < 0.0) {
            throw InvalidArgument("trajectory must be time-ordered");
        }
        const double rate = growth.rate(trajectory[n].p, trajectory[n].t);
        mass.push_back(mass.back() * std::exp(0.5 * h * (prev_rate + rate)));
        prev_rate = rate;
    }
    return mass;
}

inline double mass_from_value(double m0, double value) {
    if (!(m0 > 0.0)) {
        throw InvalidArgument("initial mass must be positive");
    }
    return m0 * std::exp(value);
}

}  // namespace seafarm
