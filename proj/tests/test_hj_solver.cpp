#include <gtest/gtest.h>

#include <cmath>

#include "oracle/instances.hpp"
#include "seafarm/hj_solver.hpp"
#include "seafarm/policy.hpp"

using namespace seafarm;
using seafarm::testing::GyreSource;

namespace {

constexpr double kG0 = 1e-6;
constexpr double kTenDays = 864000.0;

struct ZeroFlow {
    Vec2 velocity(Vec2, double) const { return {}; }
};

struct Uniform {
    double g;
    double rate(Vec2, double) const { return g; }
};

SpatialGrid km_grid(std::size_t n) { return SpatialGrid::spanning(0, 100000, 0, 100000, n, n); }

ScalarField zero_terminal(const SpatialGrid& g, double T, double value = 0.0) {
    return ScalarField::constant(g, TimeAxis::build(T, 1.0, 1), value);
}

double max_abs_error(std::span<const double> v, double expected) {
    double e = 0.0;
    for (double x : v) e = std::max(e, std::abs(x - expected));
    return e;
}

}  // namespace

TEST(Hamiltonian, Examples) {
    EXPECT_DOUBLE_EQ(hamiltonian({1, 0}, {0.5, 0}, 0.1, 0.2), 0.8);
    EXPECT_DOUBLE_EQ(hamiltonian({0, 0}, {7, -3}, 0.4, 0.3), 0.3);
    EXPECT_DOUBLE_EQ(hamiltonian({3, 4}, {0, 0}, 0.1, 0.0), 0.5);
    EXPECT_THROW(hamiltonian({NAN, 0}, {0, 0}, 0.1, 0.0), InvalidArgument);
    EXPECT_THROW(hamiltonian({0, 0}, {0, 0}, 0.1, INFINITY), InvalidArgument);
}

TEST(CflTimestep, Examples) {
    const auto g = build_grid(0, 0, 1000, 1000, 3, 3);
    EXPECT_NEAR(*cfl_timestep(1.1, 1.1, g, 0.5), 227.2727, 1e-3);
    EXPECT_DOUBLE_EQ(*cfl_timestep(2, 0, build_grid(0, 0, 500, 500, 3, 3), 0.5), 125.0);
    EXPECT_DOUBLE_EQ(*cfl_timestep(0.3, 0.7, g, 1.0), 2.0 * *cfl_timestep(0.3, 0.7, g, 0.5));
    EXPECT_FALSE(cfl_timestep(0, 0, g, 0.5).has_value());
    EXPECT_THROW(cfl_timestep(-1, 0, g, 0.5), InvalidArgument);
}

TEST(SolveConfig, Validation) {
    SolveConfig c;
    c.u_max = 0.1;
    EXPECT_NO_THROW(c.validate());
    for (double tau : {1296000.0, 1728000.0}) {
        c.tau = tau;
        EXPECT_NO_THROW(c.validate());
    }
    c.tau = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c.tau.reset();
    c.cfl = 1.5;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c.cfl = 0.5;
    c.u_max = -0.1;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(SolveBackward, ZeroFlowUniformGrowth) {
    const auto g = km_grid(21);
    SolveConfig cfg;
    cfg.u_max = 0.1;
    const auto vf = solve_from_zero(ZeroFlow{}, Uniform{kG0}, g, 0.0, kTenDays, cfg);
    EXPECT_LE(max_abs_error(vf.slices().slice(0), 0.864), 1e-6);
    // Midway the remaining horizon is 5 days.
    EXPECT_NEAR(vf.value({50000, 50000}, 0.5 * kTenDays), 0.432, 1e-6);
}

TEST(SolveBackward, ZeroFlowUniformGrowthDiscounted) {
    const auto g = km_grid(21);
    SolveConfig cfg;
    cfg.u_max = 0.1;
    cfg.tau = 432000.0;
    const auto vf = solve_from_zero(ZeroFlow{}, Uniform{kG0}, g, 0.0, kTenDays, cfg);
    const double expected = 0.432 * (1.0 - std::exp(-2.0));
    EXPECT_NEAR(expected, 0.37354, 1e-5);
    for (double v : vf.slices().slice(0)) EXPECT_LE(std::abs(v - expected) / expected, 1e-4);
}

TEST(SolveBackward, Rk2MatchesAnalytic) {
    SolveConfig cfg;
    cfg.u_max = 0.1;
    cfg.integrator = TimeIntegrator::Rk2;
    const auto vf = solve_from_zero(ZeroFlow{}, Uniform{kG0}, km_grid(11), 0.0, kTenDays, cfg);
    EXPECT_LE(max_abs_error(vf.slices().slice(0), 0.864), 1e-6);
    cfg.tau = 432000.0;
    const auto vd = solve_from_zero(ZeroFlow{}, Uniform{kG0}, km_grid(11), 0.0, kTenDays, cfg);
    EXPECT_LE(max_abs_error(vd.slices().slice(0), 0.432 * (1.0 - std::exp(-2.0))), 1e-4 * 0.37);
}

TEST(SolveBackward, FieldInputsMatchAnalytic) {
    const auto g = km_grid(11);
    const auto axis = TimeAxis::build(0, 86400, 11);
    const auto flow = FlowField::constant(g, axis, {0, 0});
    const auto growth = ScalarField::constant(g, axis, kG0);
    SolveConfig cfg;
    cfg.u_max = 0.1;
    const auto vf =
        solve_backward(flow, growth, zero_terminal(g, kTenDays), 0.0, kTenDays, cfg, TimeAxis::covering(0, kTenDays, 3600));
    EXPECT_LE(max_abs_error(vf.slices().slice(0), 0.864), 1e-6);
}

TEST(SolveBackward, MatchesDpOracleOnSmallGyre) {
    const auto in = seafarm::testing::gyre_instance(0);
    const auto dp = seafarm::testing::oracle_start_values(in, 8, 20);
    const auto vf = seafarm::testing::hj_solve(in, 8, 20);
    EXPECT_LE(seafarm::testing::max_relative_gap(vf, dp), 0.05);
}

TEST(SolveBackward, TerminalFidelity) {
    const auto g = build_grid(0, 0, 0.1, 0.1, 21, 11);
    const auto terminal = ScalarField::from_function(g, TimeAxis::build(1.0, 1.0, 1),
                                                     [](double x, double y, double) { return std::sin(3 * x) * y + 0.1; });
    SolveConfig cfg;
    cfg.u_max = 0.1;
    const auto in = seafarm::testing::gyre_instance(3);
    const auto vf = solve_backward(in.flow, in.reward, terminal, 0.0, 1.0, cfg, TimeAxis::covering(0.0, 1.0, 0.1));
    const auto last = vf.slices().slice(vf.time().nt() - 1);
    for (std::size_t c = 0; c < last.size(); ++c) EXPECT_EQ(last[c], terminal.data()[c]);
}

TEST(SolveBackward, MonotoneInTimeForSteadyFlow) {
    auto in = seafarm::testing::gyre_instance(5);
    in.flow.gyre.eps = 0.0;
    const auto vf = seafarm::testing::hj_solve(in, 16, 20);
    const auto& s = vf.slices();
    for (std::size_t k = 0; k + 1 < vf.time().nt(); ++k) {
        for (std::size_t j = 0; j < vf.grid().ny(); ++j) {
            for (std::size_t i = 0; i < vf.grid().nx(); ++i) {
                EXPECT_GE(s.at(k, j, i), s.at(k + 1, j, i) - 1e-12);
            }
        }
    }
}

TEST(SolveBackward, TranslationCovariance) {
    const auto in = seafarm::testing::gyre_instance(2);
    const auto g = SpatialGrid::spanning(0, 2, 0, 1, 12, 12);
    SolveConfig cfg;
    cfg.u_max = in.u_max;
    const auto axis = TimeAxis::covering(0.0, 1.0, 0.1);
    const auto a = solve_backward(in.flow, in.reward, zero_terminal(g, 1.0), 0.0, 1.0, cfg, axis);
    const auto b = solve_backward(in.flow, in.reward, zero_terminal(g, 1.0, 3.7), 0.0, 1.0, cfg, axis);
    for (std::size_t c = 0; c < a.slices().data().size(); ++c) {
        EXPECT_NEAR(b.slices().data()[c] - a.slices().data()[c], 3.7, 1e-12);
    }
}

TEST(SolveBackward, DriftOnlyMatchesAccumulatedReward) {
    auto in = seafarm::testing::gyre_instance(4);
    in.u_max = 0.0;
    const auto vf = seafarm::testing::hj_solve(in, 81, 20);
    for (Vec2 x0 : {Vec2{0.6, 0.4}, Vec2{1.3, 0.55}, Vec2{1.0, 0.2}}) {
        // Reference: RK4 drift with trapezoid accumulation of the reward.
        Vec2 x = x0;
        double acc = 0.0;
        const int n = 2000;
        const double h = in.horizon / n;
        for (int k = 0; k < n; ++k) {
            const double t = k * h;
            const auto next = step_vessel(x, Control{}, t, h, in.flow);
            ASSERT_TRUE(next.has_value());
            acc += 0.5 * h * (in.reward.rate(x, t) + in.reward.rate(*next, t + h));
            x = *next;
        }
        EXPECT_NEAR(vf.value(x0, 0.0), acc, 0.02 * acc);
    }
}

TEST(SolveBackward, DivergenceIsReported) {
    struct Exploding {
        double rate(Vec2, double) const { return 1e306; }
    };
    SolveConfig cfg;
    cfg.u_max = 0.1;
    try {
        solve_from_zero(ZeroFlow{}, Exploding{}, km_grid(5), 0.0, 86400.0, cfg);
        FAIL() << "expected SolverDiverged";
    } catch (const SolverDiverged& e) {
        EXPECT_GE(e.time(), 0.0);
        EXPECT_LT(e.time(), 86400.0);
    }
}

TEST(SolveBackward, RejectsBadArguments) {
    const auto g = km_grid(5);
    SolveConfig cfg;
    cfg.u_max = 0.1;
    const auto axis = TimeAxis::covering(0, 10, 5);
    EXPECT_THROW(solve_backward(ZeroFlow{}, Uniform{kG0}, zero_terminal(g, 10), 10, 10, cfg, axis), InvalidArgument);
    EXPECT_THROW(solve_backward(ZeroFlow{}, Uniform{kG0}, ScalarField::constant(g, TimeAxis::build(0, 5, 3), 0.0), 0, 10,
                                cfg, axis),
                 InvalidArgument);
    EXPECT_THROW(solve_backward(ZeroFlow{}, Uniform{kG0}, zero_terminal(g, 10), 0, 10, cfg, TimeAxis::covering(0, 9, 5)),
                 InvalidArgument);
}

TEST(Stitch, UniformAdditivity) {
    const auto fine = km_grid(11);
    const auto coarse = km_grid(6);
    StitchConfig cfg;
    cfg.solve.u_max = 0.1;
    const double H = 20 * 86400.0;
    for (double split : {2.0, 5.0, 13.0}) {
        const auto vf = stitch_long_horizon(ZeroFlow{}, coarse, Uniform{kG0}, ZeroFlow{}, fine, Uniform{kG0}, 0.0,
                                            split * 86400.0, H, cfg);
        EXPECT_LE(max_abs_error(vf.slices().slice(0), kG0 * H), 1e-6);
    }
}

TEST(Stitch, ZeroCoarseRewardDegenerates) {
    const auto in = seafarm::testing::gyre_instance(1);
    const auto g = SpatialGrid::spanning(0, 2, 0, 1, 12, 12);
    StitchConfig cfg;
    cfg.solve.u_max = in.u_max;
    cfg.output_cadence = 0.1;
    const auto stitched =
        stitch_long_horizon(in.flow, g, Uniform{0.0}, in.flow, g, in.reward, 0.0, 1.0, 3.0, cfg);
    const auto plain = solve_backward(in.flow, in.reward, zero_terminal(g, 1.0), 0.0, 1.0, cfg.solve,
                                      TimeAxis::covering(0.0, 1.0, 0.1));
    for (std::size_t c = 0; c < plain.slices().data().size(); ++c) {
        EXPECT_EQ(stitched.slices().data()[c], plain.slices().data()[c]);
    }
}

TEST(Stitch, AgreesWithSingleStage) {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        const auto in = seafarm::testing::gyre_instance(seed);
        const auto g = SpatialGrid::spanning(0, 2, 0, 1, 16, 16);
        StitchConfig cfg;
        cfg.solve.u_max = in.u_max;
        cfg.output_cadence = 0.1;
        const auto stitched = stitch_long_horizon(in.flow, g, in.reward, in.flow, g, in.reward, 0.0, 1.0, 2.0, cfg);
        const auto single = solve_from_zero(in.flow, in.reward, g, 0.0, 2.0, cfg.solve, 0.1);
        const auto a = stitched.slices().slice(0);
        const auto b = single.slices().slice(0);
        for (std::size_t c = 0; c < a.size(); ++c) EXPECT_LE(std::abs(a[c] - b[c]) / b[c], 0.02);
    }
}

TEST(Stitch, RejectsBadGeometry) {
    StitchConfig cfg;
    cfg.solve.u_max = 0.1;
    const auto small = km_grid(5);
    const auto big = SpatialGrid::spanning(-1000, 101000, 0, 100000, 5, 5);
    EXPECT_THROW(stitch_long_horizon(ZeroFlow{}, small, Uniform{kG0}, ZeroFlow{}, big, Uniform{kG0}, 0, 10, 20, cfg),
                 InvalidArgument);
    EXPECT_THROW(stitch_long_horizon(ZeroFlow{}, small, Uniform{kG0}, ZeroFlow{}, small, Uniform{kG0}, 0, 10, 10, cfg),
                 InvalidArgument);
}

TEST(Stitch, PerStageDiscountFlags) {
    const auto g = km_grid(6);
    StitchConfig cfg;
    cfg.solve.u_max = 0.1;
    cfg.solve.tau = 432000.0;
    const double Tfc = 432000.0;
    const double Text = 864000.0;
    const double tau = *cfg.solve.tau;
    auto start = [&] {
        return stitch_long_horizon(ZeroFlow{}, g, Uniform{kG0}, ZeroFlow{}, g, Uniform{kG0}, 0.0, Tfc, Text, cfg)
            .slices()
            .at(0, 2, 2);
    };
    const double both = start();
    // Closed forms of dJ/ds = -J/tau + g0 over each stage.
    const double coarse_disc = tau * kG0 * (1 - std::exp(-(Text - Tfc) / tau));
    EXPECT_NEAR(both, coarse_disc * std::exp(-Tfc / tau) + tau * kG0 * (1 - std::exp(-Tfc / tau)), 1e-5);
    cfg.discount_coarse = false;
    EXPECT_NEAR(start(), kG0 * (Text - Tfc) * std::exp(-Tfc / tau) + tau * kG0 * (1 - std::exp(-Tfc / tau)), 1e-5);
    cfg.discount_coarse = true;
    cfg.discount_fine = false;
    EXPECT_NEAR(start(), coarse_disc + kG0 * Tfc, 1e-5);
}

TEST(TransferSlice, RejectsUncoveredGrid) {
    SolveConfig cfg;
    cfg.u_max = 0.1;
    const auto vf = solve_from_zero(ZeroFlow{}, Uniform{kG0}, km_grid(5), 0, 100, cfg, 50);
    EXPECT_THROW(transfer_slice(vf, 50, SpatialGrid::spanning(0, 200000, 0, 100000, 5, 5)), InvalidArgument);
    const auto s = transfer_slice(vf, 50, km_grid(9));
    EXPECT_NEAR(s.at(0, 4, 4), 50 * kG0, 1e-15);
}

TEST(DiscountEnvelope, HugeTauRecoversPlain) {
    const auto in = seafarm::testing::gyre_instance(7);
    const auto g = SpatialGrid::spanning(0, 2, 0, 1, 12, 12);
    SolveConfig plain;
    plain.u_max = in.u_max;
    SolveConfig disc = plain;
    // Five "days" of the unit-time instance against a 1e12-unit time constant.
    disc.tau = 1e12;
    const auto a = solve_from_zero(in.flow, in.reward, g, 0.0, 5.0, disc, 0.25);
    const auto b = solve_from_zero(in.flow, in.reward, g, 0.0, 5.0, plain, 0.25);
    const auto rep = discount_envelope_check(a, b);
    EXPECT_LE(rep.max_rel_gap, 1e-3);
    EXPECT_LE(rep.max_excess, 1e-9);
}

TEST(DiscountEnvelope, ClosedFormRatio) {
    const auto g = km_grid(6);
    const double tau = 15 * 86400.0;
    const double H = 30 * 86400.0;
    SolveConfig plain;
    plain.u_max = 0.1;
    SolveConfig disc = plain;
    disc.tau = tau;
    const auto a = solve_from_zero(ZeroFlow{}, Uniform{kG0}, g, 0.0, H, disc, 86400);
    const auto b = solve_from_zero(ZeroFlow{}, Uniform{kG0}, g, 0.0, H, plain, 86400);
    const double ratio = a.slices().at(0, 3, 3) / b.slices().at(0, 3, 3);
    EXPECT_NEAR(ratio, (tau / H) * (1 - std::exp(-H / tau)), 1e-6);
    EXPECT_LE(discount_envelope_check(a, b).max_excess, 1e-12);
}

TEST(DiscountEnvelope, GyreDiscountNeverExceedsPlain) {
    const auto in = seafarm::testing::gyre_instance(8);
    const auto g = SpatialGrid::spanning(0, 2, 0, 1, 12, 12);
    SolveConfig plain;
    plain.u_max = in.u_max;
    SolveConfig disc = plain;
    disc.tau = 0.5;
    const auto a = solve_from_zero(in.flow, in.reward, g, 0.0, 1.0, disc, 0.1);
    const auto b = solve_from_zero(in.flow, in.reward, g, 0.0, 1.0, plain, 0.1);
    EXPECT_LE(discount_envelope_check(a, b).max_excess, 1e-12);
}

TEST(DiscountEnvelope, RejectsMismatch) {
    SolveConfig plain;
    plain.u_max = 0.1;
    SolveConfig disc = plain;
    disc.tau = 1000.0;
    const auto a = solve_from_zero(ZeroFlow{}, Uniform{kG0}, km_grid(5), 0, 100, disc, 50);
    const auto b = solve_from_zero(ZeroFlow{}, Uniform{kG0}, km_grid(6), 0, 100, plain, 50);
    EXPECT_THROW(discount_envelope_check(a, b), InvalidArgument);
    const auto c = solve_from_zero(ZeroFlow{}, Uniform{kG0}, km_grid(5), 0, 100, plain, 50);
    EXPECT_THROW(discount_envelope_check(c, c), InvalidArgument);
}
