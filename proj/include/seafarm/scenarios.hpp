#pragma once

// Seeded synthetic generators: analytic currents, Gaussian growth blobs,
// spatially correlated forecast errors, block-averaged currents and mission draws.
// Every generator is a pure function of its arguments.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "seafarm/errors.hpp"
#include "seafarm/field.hpp"
#include "seafarm/growth.hpp"
#include "seafarm/mission.hpp"

namespace seafarm {

// ---------------------------------------------------------------- currents

/// Unsteady double gyre on [x0, x0 + 2L] × [y0, y0 + L]; `amplitude` is a velocity
/// scale (peak speed is pi * amplitude).
struct DoubleGyre {
    double amplitude{0.1};
    double eps{0.0};
    double omega{0.0};  ///< rad/s
    double x0{0.0};
    double y0{0.0};
    double length{1.0};

    Vec2 operator()(double x, double y, double t) const {
        using std::numbers::pi;
        const double xs = (x - x0) / length;
        const double ys = (y - y0) / length;
        const double a = eps * std::sin(omega * t);
        const double b = 1.0 - 2.0 * a;
        const double f = a * xs * xs + b * xs;
        const double dfdx = 2.0 * a * xs + b;
        return {-pi * amplitude * std::sin(pi * f) * std::cos(pi * ys),
                pi * amplitude * std::cos(pi * f) * std::sin(pi * ys) * dfdx};
    }
};

/// Zonal jet: speed * exp(-((y - y_center)/half_width)^2 / 2) between x_begin and
/// x_end, cosine-tapered to zero over `taper` on both ends.
struct Highway {
    double speed{0.0};
    double y_center{0.0};
    double half_width{1.0};
    double x_begin{0.0};
    double x_end{0.0};
    double taper{0.0};

    Vec2 operator()(double x, double y, double) const {
        const double dy = (y - y_center) / half_width;
        const double across = std::exp(-0.5 * dy * dy);
        double along = 0.0;
        if (x >= x_begin && x <= x_end) {
            along = 1.0;
        } else if (taper > 0.0) {
            const double d = x < x_begin ? x_begin - x : x - x_end;
            if (d < taper) along = 0.5 * (1.0 + std::cos(std::numbers::pi * d / taper));
        }
        return {speed * across * along, 0.0};
    }
};

inline FlowField double_gyre(const DoubleGyre& p, const SpatialGrid& grid, const TimeAxis& time) {
    return FlowField::from_function(grid, time, p);
}

inline FlowField uniform_flow(Vec2 v, const SpatialGrid& grid, const TimeAxis& time) {
    return FlowField::constant(grid, time, v);
}

inline FlowField highway_flow(const Highway& h, const SpatialGrid& grid, const TimeAxis& time) {
    return FlowField::from_function(grid, time, h);
}

// ------------------------------------------------------------------ growth

struct GrowthBlob {
    Vec2 center{};
    double radius{1.0};
    double peak{0.0};  ///< 1/s
};

struct GrowthSettings {
    std::vector<GrowthBlob> blobs;
    double background{0.0};  ///< gross rate everywhere, 1/s
    double resp_rate{0.0};   ///< 1/s
    Vec2 drift{};            ///< blob centres move with this velocity
    bool diurnal{false};
    double day_length{kSecondsPerDay};
    double light_fraction{1.0};
};

inline double blob_sum(const std::vector<GrowthBlob>& blobs, Vec2 drift, double x, double y, double t) {
    double sum = 0.0;
    for (const auto& b : blobs) {
        const double cx = b.center.x + drift.x * t;
        const double cy = b.center.y + drift.y * t;
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        sum += b.peak * std::exp(-d2 / (2.0 * b.radius * b.radius));
    }
    return sum;
}

inline GrowthModel growth_blobs(const GrowthSettings& s, const SpatialGrid& grid, const TimeAxis& time) {
    for (const auto& b : s.blobs) {
        if (!(b.radius > 0.0)) throw InvalidArgument("growth blob radius must be positive");
    }
    ScalarField gross = ScalarField::from_function(
        grid, time, [&](double x, double y, double t) { return s.background + blob_sum(s.blobs, s.drift, x, y, t); });
    return GrowthModel(std::move(gross), s.resp_rate, s.diurnal, s.day_length, s.light_fraction);
}

// ---------------------------------------------------------- forecast error

struct ErrorModel {
    double sigma0{0.0};          ///< vector RMSE at lead 0 (length units per second)
    double growth_per_day{0.0};  ///< relative RMSE growth per day of lead
    double corr_len{1.0};        ///< spatial correlation length (length units)

    double sigma(double lead_seconds) const { return sigma0 * (1.0 + growth_per_day * lead_seconds / kSecondsPerDay); }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream seed for one issued forecast.
inline std::uint64_t issue_seed(std::uint64_t seed, double t_issue) {
    return splitmix64(seed ^ splitmix64(std::bit_cast<std::uint64_t>(t_issue)));
}

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma_cells) {
    if (!(sigma_cells > 1e-9)) {
        return {1.0};
    }
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma_cells));
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
        const double z = static_cast<double>(d) / sigma_cells;
        w[static_cast<std::size_t>(d + radius)] = std::exp(-0.5 * z * z);
    }
    return w;
}

// Separable Gaussian filter; taps falling off the grid are dropped and the
// remaining weights renormalised.
inline std::vector<double> smooth(const std::vector<double>& in, const SpatialGrid& g, double corr_len) {
    const auto kx = gaussian_kernel(corr_len / g.dx());
    const auto ky = gaussian_kernel(corr_len / g.dy());
    const auto rx = static_cast<std::ptrdiff_t>(kx.size() / 2);
    const auto ry = static_cast<std::ptrdiff_t>(ky.size() / 2);
    const auto nx = static_cast<std::ptrdiff_t>(g.nx());
    const auto ny = static_cast<std::ptrdiff_t>(g.ny());
    std::vector<double> tmp(in.size());
    std::vector<double> out(in.size());
    for (std::ptrdiff_t j = 0; j < ny; ++j) {
        for (std::ptrdiff_t i = 0; i < nx; ++i) {
            double s = 0.0;
            double w = 0.0;
            for (std::ptrdiff_t d = -rx; d <= rx; ++d) {
                const std::ptrdiff_t ii = i + d;
                if (ii < 0 || ii >= nx) continue;
                const double wk = kx[static_cast<std::size_t>(d + rx)];
                s += wk * in[static_cast<std::size_t>(j * nx + ii)];
                w += wk;
            }
            tmp[static_cast<std::size_t>(j * nx + i)] = s / w;
        }
    }
    for (std::ptrdiff_t j = 0; j < ny; ++j) {
        for (std::ptrdiff_t i = 0; i < nx; ++i) {
            double s = 0.0;
            double w = 0.0;
            for (std::ptrdiff_t d = -ry; d <= ry; ++d) {
                const std::ptrdiff_t jj = j + d;
                if (jj < 0 || jj >= ny) continue;
                const double wk = ky[static_cast<std::size_t>(d + ry)];
                s += wk * tmp[static_cast<std::size_t>(jj * nx + i)];
                w += wk;
            }
            out[static_cast<std::size_t>(j * nx + i)] = s / w;
        }
    }
    return out;
}

struct VectorPattern {
    std::vector<double> u;
    std::vector<double> v;
};

inline double inner(const VectorPattern& a, const VectorPattern& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.u.size(); ++n) s += a.u[n] * b.u[n] + a.v[n] * b.v[n];
    return s / static_cast<double>(a.u.size());
}

inline VectorPattern smooth_pattern(const SpatialGrid& g, double corr_len, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> u(g.size());
    std::vector<double> v(g.size());
    for (auto& x : u) x = normal(rng);
    for (auto& x : v) x = normal(rng);
    return {smooth(u, g, corr_len), smooth(v, g, corr_len)};
}

inline void scale_to_unit_rms(VectorPattern& p) {
    const double rms = std::sqrt(inner(p, p));
    if (rms > 0.0) {
        for (auto& x : p.u) x /= rms;
        for (auto& x : p.v) x /= rms;
    }
}

}  // namespace detail

/// Forecast error increment on `window`'s grid and time axis. The spatial pattern
/// rotates from one correlated noise field to an orthogonal one over the window
/// and is scaled so the vector RMSE at lead L equals model.sigma(L) exactly.
inline FlowField make_error_field(const SpatialGrid& grid, const TimeAxis& time, const ErrorModel& model,
                                  std::uint64_t seed, double t_issue) {
    if (!(model.sigma0 >= 0.0)) throw InvalidArgument("sigma0 must be non-negative");
    if (!(model.corr_len > 0.0)) throw InvalidArgument("correlation length must be positive");
    const std::size_t n = grid.size();
    std::vector<double> u(n * time.nt(), 0.0);
    std::vector<double> v(n * time.nt(), 0.0);
    if (model.sigma0 == 0.0) {
        return FlowField(grid, time, std::move(u), std::move(v));
    }
    std::mt19937_64 rng(issue_seed(seed, t_issue));
    detail::VectorPattern p1 = detail::smooth_pattern(grid, model.corr_len, rng);
    detail::VectorPattern p2 = detail::smooth_pattern(grid, model.corr_len, rng);
    detail::scale_to_unit_rms(p1);
    const double c = detail::inner(p1, p2);
    for (std::size_t m = 0; m < n; ++m) {
        p2.u[m] -= c * p1.u[m];
        p2.v[m] -= c * p1.v[m];
    }
    detail::scale_to_unit_rms(p2);

    const double span = time.t_end() - t_issue;
    for (std::size_t k = 0; k < time.nt(); ++k) {
        const double lead = std::max(0.0, time.time(k) - t_issue);
        const double phi = span > 0.0 ? 0.5 * std::numbers::pi * std::min(1.0, lead / span) : 0.0;
        const double s = model.sigma(lead);
        const double a = s * std::cos(phi);
        const double b = s * std::sin(phi);
        for (std::size_t m = 0; m < n; ++m) {
            u[k * n + m] = a * p1.u[m] + b * p2.u[m];
            v[k * n + m] = a * p1.v[m] + b * p2.v[m];
        }
    }
    return FlowField(grid, time, std::move(u), std::move(v));
}

inline FlowField make_error_field(const FlowField& window, const ErrorModel& model, std::uint64_t seed,
                                  double t_issue) {
    return make_error_field(window.grid(), window.time(), model, seed, t_issue);
}

/// Spatial RMS of the vector difference between two flows at one slice.
inline double slice_rmse(const FlowField& a, const FlowField& b, std::size_t k) {
    if (!(a.grid() == b.grid())) throw InvalidArgument("rmse needs matching grids");
    const std::size_t n = a.grid().size();
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double du = a.u()[k * n + m] - b.u()[k * n + m];
        const double dv = a.v()[k * n + m] - b.v()[k * n + m];
        s += du * du + dv * dv;
    }
    return std::sqrt(s / static_cast<double>(n));
}

// --------------------------------------------------------- block averages

/// Integral over [a, b] of the piecewise-linear interpolant through (t0 + k dt, values[k]).
inline double integrate_piecewise_linear(const TimeAxis& axis, std::span<const double> values, std::size_t stride,
                                         std::size_t offset, double a, double b) {
    auto value_at = [&](double t) {
        if (axis.nt() == 1) return values[offset];
        double f = std::clamp((t - axis.t0()) / axis.dt(), 0.0, static_cast<double>(axis.nt() - 1));
        auto k = static_cast<std::size_t>(std::floor(f));
        if (k >= axis.nt() - 1) k = axis.nt() - 2;
        const double w = f - static_cast<double>(k);
        const double lo = values[k * stride + offset];
        const double hi = values[(k + 1) * stride + offset];
        return lo + w * (hi - lo);
    };
    double sum = 0.0;
    double left = a;
    // Break points are the stored instants strictly inside (a, b).
    for (std::size_t k = 0; k < axis.nt(); ++k) {
        const double tk = axis.time(k);
        if (tk <= left || tk >= b) continue;
        sum += 0.5 * (tk - left) * (value_at(left) + value_at(tk));
        left = tk;
    }
    sum += 0.5 * (b - left) * (value_at(left) + value_at(b));
    return sum;
}

struct AverageBias {
    double scale{1.0};
    double rotation{0.0};  ///< radians, counter-clockwise
};

/// Block means of `truth` over consecutive windows of length `window`, resampled
/// to `coarse_grid`. Slice b is stamped at the centre of block b.
inline FlowField monthly_average(const FlowField& truth, double window, const SpatialGrid& coarse_grid,
                                 AverageBias bias = {}) {
    const TimeAxis& ta = truth.time();
    const double span = ta.t_end() - ta.t0();
    if (!(window > 0.0)) throw InvalidArgument("averaging window must be positive");
    const auto blocks = static_cast<std::size_t>(std::floor(span / window + 1e-9));
    if (blocks == 0) throw InvalidArgument("averaging window longer than the truth span");
    if (!truth.grid().covers(coarse_grid)) throw OutOfDomain("coarse grid exceeds truth grid");

    const std::size_t n = truth.grid().size();
    const TimeAxis out_axis = TimeAxis::build(ta.t0() + 0.5 * window, window, blocks);
    std::vector<double> u(n * blocks);
    std::vector<double> v(n * blocks);
    const double cr = std::cos(bias.rotation) * bias.scale;
    const double sr = std::sin(bias.rotation) * bias.scale;
    for (std::size_t b = 0; b < blocks; ++b) {
        const double a = ta.t0() + static_cast<double>(b) * window;
        for (std::size_t m = 0; m < n; ++m) {
            const double mu = integrate_piecewise_linear(ta, truth.u(), n, m, a, a + window) / window;
            const double mv = integrate_piecewise_linear(ta, truth.v(), n, m, a, a + window) / window;
            u[b * n + m] = cr * mu - sr * mv;
            v[b * n + m] = sr * mu + cr * mv;
        }
    }
    const FlowField fine_mean(truth.grid(), out_axis, std::move(u), std::move(v));
    return resample(fine_mean, coarse_grid, out_axis);
}

// ----------------------------------------------------------------- missions

struct MissionSampling {
    double x_min{0.0};
    double x_max{0.0};
    double y_min{0.0};
    double y_max{0.0};
    double min_border_dist{0.0};
    double t_first{0.0};  ///< earliest start time
    double t_last{0.0};   ///< latest start time
    double horizon{0.0};
    double m0{100.0};
    double u_max{0.0};
};

inline std::vector<Mission> sample_missions(const MissionSampling& s, std::size_t n, std::uint64_t seed) {
    const double xa = s.x_min + s.min_border_dist;
    const double xb = s.x_max - s.min_border_dist;
    const double ya = s.y_min + s.min_border_dist;
    const double yb = s.y_max - s.min_border_dist;
    if (!(xa <= xb) || !(ya <= yb)) throw InvalidArgument("no feasible start region after border shrink");
    if (!(s.t_first <= s.t_last)) throw InvalidArgument("start-time range is empty");
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> ux(xa, xb);
    std::uniform_real_distribution<double> uy(ya, yb);
    std::uniform_real_distribution<double> ut(s.t_first, s.t_last);
    std::vector<Mission> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Mission m;
        m.id = k;
        m.x0 = {ux(rng), uy(rng)};
        m.t0 = s.t_first == s.t_last ? s.t_first : ut(rng);
        m.horizon = s.horizon;
        m.m0 = s.m0;
        m.u_max = s.u_max;
        out.push_back(m);
    }
    return out;
}

}  // namespace seafarm
