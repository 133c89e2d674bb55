#pragma once

// Uniform rectilinear space-time grids and the scalar/vector fields stored on them.
//
// Storage is time-major, then row-major: index = (k * ny + j) * nx + i with k the
// time slice, j the y row and i the x column. Sampling is bilinear in space and
// linear in time and throws OutOfDomain outside the inclusive space-time box.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "seafarm/errors.hpp"

namespace seafarm {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    constexpr Vec2& operator+=(Vec2 b) {
        x += b.x;
        y += b.y;
        return *this;
    }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

namespace detail {
// Queries within this fraction of a cell (or time step) outside the box are
// treated as round-off and snapped onto the boundary.
inline constexpr double kBoundsSlack = 1e-9;
}  // namespace detail

class SpatialGrid {
public:
    static SpatialGrid build(double x0, double y0, double dx, double dy, std::size_t nx, std::size_t ny) {
        if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) {
            throw InvalidArgument("grid spacing must be positive and finite");
        }
        if (nx < 2 || ny < 2) {
            throw InvalidArgument("grid needs at least 2 nodes per axis");
        }
        if (!std::isfinite(x0) || !std::isfinite(y0)) {
            throw InvalidArgument("grid origin must be finite");
        }
        return SpatialGrid(x0, y0, dx, dy, nx, ny);
    }

    /// Grid with nx × ny nodes spanning [x_min, x_max] × [y_min, y_max].
    static SpatialGrid spanning(double x_min, double x_max, double y_min, double y_max, std::size_t nx,
                                std::size_t ny) {
        if (nx < 2 || ny < 2) {
            throw InvalidArgument("grid needs at least 2 nodes per axis");
        }
        return build(x_min, y_min, (x_max - x_min) / static_cast<double>(nx - 1),
                     (y_max - y_min) / static_cast<double>(ny - 1), nx, ny);
    }

    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return nx_ * ny_; }
    double x_max() const { return x0_ + static_cast<double>(nx_ - 1) * dx_; }
    double y_max() const { return y0_ + static_cast<double>(ny_ - 1) * dy_; }
    double x(std::size_t i) const { return x0_ + static_cast<double>(i) * dx_; }
    double y(std::size_t j) const { return y0_ + static_cast<double>(j) * dy_; }
    Vec2 node(std::size_t i, std::size_t j) const { return {x(i), y(j)}; }

    bool contains(Vec2 p) const {
        const double sx = detail::kBoundsSlack * dx_;
        const double sy = detail::kBoundsSlack * dy_;
        return p.x >= x0_ - sx && p.x <= x_max() + sx && p.y >= y0_ - sy && p.y <= y_max() + sy;
    }

    /// True when `inner`'s box lies within this grid's box (up to round-off).
    bool covers(const SpatialGrid& inner) const {
        return contains({inner.x0(), inner.y0()}) && contains({inner.x_max(), inner.y_max()});
    }

    friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

private:
    SpatialGrid(double x0, double y0, double dx, double dy, std::size_t nx, std::size_t ny)
        : x0_(x0), y0_(y0), dx_(dx), dy_(dy), nx_(nx), ny_(ny) {}

    double x0_;
    double y0_;
    double dx_;
    double dy_;
    std::size_t nx_;
    std::size_t ny_;
};

inline SpatialGrid build_grid(double x0, double y0, double dx, double dy, std::size_t nx, std::size_t ny) {
    return SpatialGrid::build(x0, y0, dx, dy, nx, ny);
}

class TimeAxis {
public:
    static TimeAxis build(double t0, double dt, std::size_t nt) {
        if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t0)) {
            throw InvalidArgument("time axis needs finite t0 and dt > 0");
        }
        if (nt < 1) {
            throw InvalidArgument("time axis needs at least one slice");
        }
        return TimeAxis(t0, dt, nt);
    }

    /// Uniform axis from t_begin to t_end whose spacing does not exceed `max_dt`.
    static TimeAxis covering(double t_begin, double t_end, double max_dt) {
        if (!(t_end > t_begin)) {
            throw InvalidArgument("time window must have positive length");
        }
        if (!(max_dt > 0.0)) {
            throw InvalidArgument("time cadence must be positive");
        }
        const auto steps = static_cast<std::size_t>(std::ceil((t_end - t_begin) / max_dt - 1e-9));
        const std::size_t n = std::max<std::size_t>(steps, 1);
        return build(t_begin, (t_end - t_begin) / static_cast<double>(n), n + 1);
    }

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t nt() const { return nt_; }
    double t_end() const { return t0_ + static_cast<double>(nt_ - 1) * dt_; }
    double time(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }

    bool contains(double t) const {
        const double s = detail::kBoundsSlack * dt_;
        return t >= t0_ - s && t <= t_end() + s;
    }

    friend bool operator==(const TimeAxis&, const TimeAxis&) = default;

private:
    TimeAxis(double t0, double dt, std::size_t nt) : t0_(t0), dt_(dt), nt_(nt) {}

    double t0_;
    double dt_;
    std::size_t nt_;
};

/// Lower corner indices and fractional weights of one space-time interpolation cell.
struct Stencil {
    std::size_t i{0};
    std::size_t j{0};
    std::size_t k{0};
    double wx{0.0};
    double wy{0.0};
    double wt{0.0};
};

namespace detail {

inline std::pair<std::size_t, double> locate_axis(double q, double origin, double step, std::size_t n) {
    double f = (q - origin) / step;
    const double last = static_cast<double>(n - 1);
    f = std::clamp(f, 0.0, last);  // only absorbs slack; bounds were checked by the caller
    auto idx = static_cast<std::size_t>(std::floor(f));
    if (idx >= n - 1) {
        idx = n - 2;
    }
    return {idx, f - static_cast<double>(idx)};
}

inline std::string describe_query(Vec2 p, double t) {
    std::ostringstream os;
    os << "query (" << p.x << ", " << p.y << ", t=" << t << ") outside field bounds";
    return os.str();
}

}  // namespace detail

inline Stencil locate(const SpatialGrid& grid, const TimeAxis& axis, Vec2 p, double t) {
    if (!grid.contains(p) || !axis.contains(t) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw OutOfDomain(detail::describe_query(p, t));
    }
    Stencil s;
    std::tie(s.i, s.wx) = detail::locate_axis(p.x, grid.x0(), grid.dx(), grid.nx());
    std::tie(s.j, s.wy) = detail::locate_axis(p.y, grid.y0(), grid.dy(), grid.ny());
    if (axis.nt() > 1) {
        std::tie(s.k, s.wt) = detail::locate_axis(t, axis.t0(), axis.dt(), axis.nt());
    }
    return s;
}

namespace detail {

inline double interpolate(std::span<const double> data, const SpatialGrid& g, std::size_t nt, const Stencil& s) {
    const std::size_t nx = g.nx();
    const std::size_t ny = g.ny();
    auto bilinear = [&](std::size_t k) {
        const std::size_t base = (k * ny + s.j) * nx + s.i;
        const double v00 = data[base];
        const double v10 = data[base + 1];
        const double v01 = data[base + nx];
        const double v11 = data[base + nx + 1];
        const double lo = v00 + s.wx * (v10 - v00);
        const double hi = v01 + s.wx * (v11 - v01);
        return lo + s.wy * (hi - lo);
    };
    const double a = bilinear(s.k);
    if (nt == 1 || s.wt == 0.0) {
        return a;
    }
    const double b = bilinear(s.k + 1);
    return a + s.wt * (b - a);
}

inline void require_finite(std::span<const double> data, const char* what) {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw InvalidArgument(std::string(what) + " contains non-finite values");
        }
    }
}

}  // namespace detail

class ScalarField {
public:
    ScalarField(SpatialGrid grid, TimeAxis time, std::vector<double> data)
        : grid_(grid), time_(time), data_(std::move(data)) {
        if (data_.size() != grid_.size() * time_.nt()) {
            throw InvalidArgument("scalar field payload does not match grid and time axis");
        }
        detail::require_finite(data_, "scalar field");
    }

    static ScalarField constant(const SpatialGrid& grid, const TimeAxis& time, double value) {
        return ScalarField(grid, time, std::vector<double>(grid.size() * time.nt(), value));
    }

    template <class F>
        requires std::invocable<F, double, double, double>
    static ScalarField from_function(const SpatialGrid& grid, const TimeAxis& time, F&& f) {
        std::vector<double> data;
        data.reserve(grid.size() * time.nt());
        for (std::size_t k = 0; k < time.nt(); ++k) {
            for (std::size_t j = 0; j < grid.ny(); ++j) {
                for (std::size_t i = 0; i < grid.nx(); ++i) {
                    data.push_back(f(grid.x(i), grid.y(j), time.time(k)));
                }
            }
        }
        return ScalarField(grid, time, std::move(data));
    }

    const SpatialGrid& grid() const { return grid_; }
    const TimeAxis& time() const { return time_; }
    std::span<const double> data() const { return data_; }

    std::size_t index(std::size_t k, std::size_t j, std::size_t i) const { return (k * grid_.ny() + j) * grid_.nx() + i; }
    double at(std::size_t k, std::size_t j, std::size_t i) const { return data_[index(k, j, i)]; }

    std::span<const double> slice(std::size_t k) const { return std::span(data_).subspan(k * grid_.size(), grid_.size()); }

    double sample(Vec2 p, double t) const {
        return detail::interpolate(data_, grid_, time_.nt(), locate(grid_, time_, p, t));
    }

private:
    SpatialGrid grid_;
    TimeAxis time_;
    std::vector<double> data_;
};

class FlowField {
public:
    FlowField(SpatialGrid grid, TimeAxis time, std::vector<double> u, std::vector<double> v)
        : grid_(grid), time_(time), u_(std::move(u)), v_(std::move(v)) {
        const std::size_t n = grid_.size() * time_.nt();
        if (u_.size() != n || v_.size() != n) {
            throw InvalidArgument("flow field payload does not match grid and time axis");
        }
        detail::require_finite(u_, "flow field u component");
        detail::require_finite(v_, "flow field v component");
    }

    static FlowField constant(const SpatialGrid& grid, const TimeAxis& time, Vec2 value) {
        const std::size_t n = grid.size() * time.nt();
        return FlowField(grid, time, std::vector<double>(n, value.x), std::vector<double>(n, value.y));
    }

    template <class F>
        requires std::invocable<F, double, double, double>
    static FlowField from_function(const SpatialGrid& grid, const TimeAxis& time, F&& f) {
        const std::size_t n = grid.size() * time.nt();
        std::vector<double> u;
        std::vector<double> v;
        u.reserve(n);
        v.reserve(n);
        for (std::size_t k = 0; k < time.nt(); ++k) {
            for (std::size_t j = 0; j < grid.ny(); ++j) {
                for (std::size_t i = 0; i < grid.nx(); ++i) {
                    const Vec2 w = f(grid.x(i), grid.y(j), time.time(k));
                    u.push_back(w.x);
                    v.push_back(w.y);
                }
            }
        }
        return FlowField(grid, time, std::move(u), std::move(v));
    }

    const SpatialGrid& grid() const { return grid_; }
    const TimeAxis& time() const { return time_; }
    std::span<const double> u() const { return u_; }
    std::span<const double> v() const { return v_; }

    std::size_t index(std::size_t k, std::size_t j, std::size_t i) const { return (k * grid_.ny() + j) * grid_.nx() + i; }
    Vec2 at(std::size_t k, std::size_t j, std::size_t i) const {
        const std::size_t n = index(k, j, i);
        return {u_[n], v_[n]};
    }

    Vec2 sample(Vec2 p, double t) const {
        const Stencil s = locate(grid_, time_, p, t);
        return {detail::interpolate(u_, grid_, time_.nt(), s), detail::interpolate(v_, grid_, time_.nt(), s)};
    }

    Vec2 velocity(Vec2 p, double t) const { return sample(p, t); }

private:
    SpatialGrid grid_;
    TimeAxis time_;
    std::vector<double> u_;
    std::vector<double> v_;
};

inline Vec2 sample_vector(const FlowField& f, Vec2 p, double t) { return f.sample(p, t); }
inline double sample_scalar(const ScalarField& f, Vec2 p, double t) { return f.sample(p, t); }

/// Anything that reports a current velocity at (x, t).
template <class F>
concept VelocitySource = requires(const F& f, Vec2 p, double t) {
    { f.velocity(p, t) } -> std::convertible_to<Vec2>;
};

/// Explicit hold-extrapolation in time: queries before/after the stored span read
/// the first/last slice. Space is still checked strictly.
class TimeClampedFlow {
public:
    explicit TimeClampedFlow(const FlowField& field) : field_(&field) {}

    Vec2 velocity(Vec2 p, double t) const {
        const TimeAxis& a = field_->time();
        return field_->sample(p, std::clamp(t, a.t0(), a.t_end()));
    }

    const FlowField& field() const { return *field_; }

private:
    const FlowField* field_;
};

namespace detail {

inline void require_covered(const SpatialGrid& src_grid, const TimeAxis& src_time, const SpatialGrid& grid,
                            const TimeAxis& time) {
    if (!src_grid.covers(grid)) {
        throw OutOfDomain("resample target grid exceeds source grid");
    }
    if (!src_time.contains(time.t0()) || !src_time.contains(time.t_end())) {
        throw OutOfDomain("resample target time axis exceeds source time axis");
    }
}

}  // namespace detail

inline ScalarField resample(const ScalarField& f, const SpatialGrid& grid, const TimeAxis& time) {
    detail::require_covered(f.grid(), f.time(), grid, time);
    return ScalarField::from_function(grid, time, [&](double x, double y, double t) { return f.sample({x, y}, t); });
}

inline FlowField resample(const FlowField& f, const SpatialGrid& grid, const TimeAxis& time) {
    detail::require_covered(f.grid(), f.time(), grid, time);
    return FlowField::from_function(grid, time, [&](double x, double y, double t) { return f.sample({x, y}, t); });
}

}  // namespace seafarm
