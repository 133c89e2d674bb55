#include <gtest/gtest.h>

#include <random>

#include "seafarm/field.hpp"

using namespace seafarm;

namespace {

TimeAxis single_slice(double t0 = 0.0) { return TimeAxis::build(t0, 1.0, 1); }

}  // namespace

TEST(BuildGrid, SpansRequestedBox) {
    const auto g = build_grid(0, 0, 1, 1, 3, 3);
    EXPECT_DOUBLE_EQ(g.x_max(), 2.0);
    EXPECT_DOUBLE_EQ(g.y_max(), 2.0);
    EXPECT_EQ(g.size(), 9u);

    const auto h = build_grid(-1, -1, 0.5, 0.5, 5, 5);
    EXPECT_DOUBLE_EQ(h.x0(), -1.0);
    EXPECT_DOUBLE_EQ(h.x_max(), 1.0);
    EXPECT_DOUBLE_EQ(h.y_max(), 1.0);
}

TEST(BuildGrid, RejectsBadParameters) {
    EXPECT_THROW(build_grid(0, 0, 0, 1, 3, 3), InvalidArgument);
    EXPECT_THROW(build_grid(0, 0, 1, -1, 3, 3), InvalidArgument);
    EXPECT_THROW(build_grid(0, 0, 1, 1, 1, 3), InvalidArgument);
    EXPECT_THROW(build_grid(0, 0, 1, 1, 3, 0), InvalidArgument);
}

TEST(TimeAxis, CoveringLandsOnEnd) {
    const auto a = TimeAxis::covering(0.0, 10.0, 3.0);
    EXPECT_EQ(a.nt(), 5u);
    EXPECT_NEAR(a.t_end(), 10.0, 1e-12);
    EXPECT_LE(a.dt(), 3.0);
    EXPECT_THROW(TimeAxis::covering(1.0, 1.0, 1.0), InvalidArgument);
}

TEST(SampleVector, CellCentreAverage) {
    const auto g = build_grid(0, 0, 1, 1, 2, 2);
    // u corners (0,0)=0 (1,0)=0 (0,1)=2 (1,1)=2
    FlowField f(g, single_slice(), {0, 0, 2, 2}, {0, 0, 0, 0});
    EXPECT_DOUBLE_EQ(sample_vector(f, {0.5, 0.5}, 0.0).x, 1.0);
}

TEST(SampleVector, ConstantField) {
    const auto g = build_grid(0, 0, 1, 1, 4, 3);
    const auto f = FlowField::constant(g, TimeAxis::build(0, 10, 3), {0.5, -0.5});
    for (Vec2 p : {Vec2{0, 0}, Vec2{3, 2}, Vec2{1.3, 0.7}}) {
        const Vec2 v = f.sample(p, 13.7);
        EXPECT_DOUBLE_EQ(v.x, 0.5);
        EXPECT_DOUBLE_EQ(v.y, -0.5);
    }
}

TEST(SampleVector, LinearInTime) {
    const auto g = build_grid(0, 0, 1, 1, 2, 2);
    FlowField f(g, TimeAxis::build(0, 100, 2), {0, 0, 0, 0, 1, 1, 1, 1}, std::vector<double>(8, 0.0));
    EXPECT_DOUBLE_EQ(f.sample({0, 0}, 50).x, 0.5);
}

TEST(SampleScalar, ConstantAndPlane) {
    const auto g = build_grid(0, 0, 0.5, 0.5, 5, 5);
    const auto c = ScalarField::constant(g, single_slice(), 0.2);
    EXPECT_DOUBLE_EQ(sample_scalar(c, {1.1, 0.3}, 0.0), 0.2);
    const auto plane = ScalarField::from_function(g, single_slice(), [](double x, double, double) { return x; });
    EXPECT_DOUBLE_EQ(sample_scalar(plane, {0.75, 1.9}, 0.0), 0.75);
}

TEST(SampleScalar, OutOfBoundsThrows) {
    const auto g = build_grid(0, 0, 1, 1, 3, 3);
    const auto c = ScalarField::constant(g, TimeAxis::build(0, 1, 2), 1.0);
    EXPECT_THROW(c.sample({-0.1, 1}, 0.5), OutOfDomain);
    EXPECT_THROW(c.sample({1, 2.5}, 0.5), OutOfDomain);
    EXPECT_THROW(c.sample({1, 1}, 1.5), OutOfDomain);
    EXPECT_THROW(c.sample({1, 1}, -0.01), OutOfDomain);
    EXPECT_NO_THROW(c.sample({2, 2}, 1.0));
}

TEST(Fields, RejectNonFiniteAndShapeMismatch) {
    const auto g = build_grid(0, 0, 1, 1, 2, 2);
    EXPECT_THROW(ScalarField(g, single_slice(), {0, 1, 2}), InvalidArgument);
    EXPECT_THROW(ScalarField(g, single_slice(), {0, 1, NAN, 2}), InvalidArgument);
    EXPECT_THROW(FlowField(g, single_slice(), {0, 0, 0, 0}, {0, 0, INFINITY, 0}), InvalidArgument);
}

// Property: interpolation reproduces fields affine in x, y, t exactly.
TEST(Interpolation, AffineExactness) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(-3, 3);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
        const auto g = build_grid(coef(rng), coef(rng), 0.3, 0.7, 6, 5);
        const auto axis = TimeAxis::build(2.0, 0.5, 4);
        auto f = [&](double x, double y, double t) { return a + b * x + c * y + d * t; };
        const auto s = ScalarField::from_function(g, axis, f);
        std::uniform_real_distribution<double> ux(g.x0(), g.x_max()), uy(g.y0(), g.y_max()),
            ut(axis.t0(), axis.t_end());
        for (int q = 0; q < 40; ++q) {
            const double x = ux(rng), y = uy(rng), t = ut(rng);
            EXPECT_NEAR(s.sample({x, y}, t), f(x, y, t), 1e-12);
        }
    }
}

// Property: interpolated values stay within the 8 contributing corner values.
TEST(Interpolation, BoundedByCorners) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nrm;
    const auto g = build_grid(0, 0, 1, 1, 5, 4);
    const auto axis = TimeAxis::build(0, 1, 3);
    std::vector<double> data(g.size() * axis.nt());
    for (auto& v : data) v = nrm(rng);
    const ScalarField s(g, axis, data);
    std::uniform_real_distribution<double> ux(0, 4), uy(0, 3), ut(0, 2);
    for (int q = 0; q < 500; ++q) {
        const Vec2 p{ux(rng), uy(rng)};
        const double t = ut(rng);
        const Stencil st = locate(g, axis, p, t);
        double lo = 1e300, hi = -1e300;
        for (std::size_t dk = 0; dk <= 1; ++dk)
            for (std::size_t dj = 0; dj <= 1; ++dj)
                for (std::size_t di = 0; di <= 1; ++di) {
                    const double v = s.at(st.k + dk, st.j + dj, st.i + di);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
        const double v = s.sample(p, t);
        EXPECT_GE(v, lo - 1e-15);
        EXPECT_LE(v, hi + 1e-15);
    }
}

TEST(Resample, ConstantStaysConstant) {
    const auto src = ScalarField::constant(build_grid(0, 0, 1, 1, 3, 3), single_slice(), 4.25);
    const auto dst = resample(src, build_grid(0, 0, 0.25, 0.25, 9, 9), single_slice());
    for (double v : dst.data()) EXPECT_DOUBLE_EQ(v, 4.25);
}

TEST(Resample, PlaneExactOnFinerGrid) {
    const auto src =
        ScalarField::from_function(build_grid(0, 0, 1, 1, 5, 5), single_slice(), [](double x, double, double) { return 2 * x; });
    const auto fine = build_grid(0, 0, 0.5, 0.5, 9, 9);
    const auto dst = resample(src, fine, single_slice());
    for (std::size_t j = 0; j < fine.ny(); ++j)
        for (std::size_t i = 0; i < fine.nx(); ++i) EXPECT_NEAR(dst.at(0, j, i), 2 * fine.x(i), 1e-14);
}

TEST(Resample, NodeCoincidenceRecoversSource) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto coarse = build_grid(0, 0, 1, 1, 3, 3);
    std::vector<double> data(9);
    for (auto& v : data) v = u(rng);
    const ScalarField src(coarse, single_slice(), data);
    const auto fine = resample(src, build_grid(0, 0, 0.5, 0.5, 5, 5), single_slice());
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(fine.sample(coarse.node(i, j), 0.0), src.at(0, j, i));
}

TEST(Resample, RejectsLargerTarget) {
    const auto src = ScalarField::constant(build_grid(0, 0, 1, 1, 3, 3), TimeAxis::build(0, 1, 2), 1.0);
    EXPECT_THROW(resample(src, build_grid(0, 0, 1, 1, 4, 3), TimeAxis::build(0, 1, 2)), OutOfDomain);
    EXPECT_THROW(resample(src, build_grid(0, 0, 1, 1, 3, 3), TimeAxis::build(0, 1, 3)), OutOfDomain);
}

TEST(TimeClampedFlow, HoldsEndSlices) {
    const auto g = build_grid(0, 0, 1, 1, 2, 2);
    FlowField f(g, TimeAxis::build(10, 10, 2), {0, 0, 0, 0, 1, 1, 1, 1}, std::vector<double>(8, 0.0));
    const TimeClampedFlow c(f);
    EXPECT_DOUBLE_EQ(c.velocity({0.5, 0.5}, -100).x, 0.0);
    EXPECT_DOUBLE_EQ(c.velocity({0.5, 0.5}, 1e9).x, 1.0);
    EXPECT_THROW(c.velocity({2, 0}, 15), OutOfDomain);
}
