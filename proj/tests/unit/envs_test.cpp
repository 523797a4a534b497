#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfrl/envs.hpp"
#include "mfrl/error.hpp"
#include "mfrl/rng.hpp"

using namespace mfrl;

namespace {

EnvSpec noiseless(double a, double b) {
    EnvSpec s = default_env(EnvKind::congestion);
    s.a = a;
    s.b = b;
    s.noise = 0.0;
    return s;
}

}  // namespace

TEST(Step, NoiselessLinear) {
    const auto s = noiseless(1.0, 1.0);
    EXPECT_EQ(step(s, Vec2(1, 0), Vec2(-1, 0), Vec2(0.3, -2.0)), Vec2(0, 0));
    EXPECT_EQ(step(s, Vec2(0.4, -0.2), Vec2::Zero(), Vec2::Zero()), Vec2(0.4, -0.2));
}

TEST(Step, Arithmetic) {
    auto s = noiseless(1.0, 2.0);
    s.noise = 0.1;
    const Vec2 x = step(s, Vec2::Zero(), Vec2(0.5, 0.0), Vec2(1.0, 1.0));
    EXPECT_NEAR(x.x(), 1.1, 1e-15);
    EXPECT_NEAR(x.y(), 0.1, 1e-15);
}

TEST(Step, Affine) {
    const auto s = noiseless(0.7, 1.3);
    const Vec2 x1(0.2, -1.0), x2(1.5, 0.4), u1(0.3, 0.3), u2(-0.8, 2.0);
    const Vec2 lhs = step(s, x1 + x2, u1 + u2, Vec2::Zero());
    const Vec2 rhs = step(s, x1, u1, Vec2::Zero()) + step(s, x2, u2, Vec2::Zero()) -
                     step(s, Vec2::Zero(), Vec2::Zero(), Vec2::Zero());
    EXPECT_NEAR((lhs - rhs).norm(), 0.0, 1e-14);
}

TEST(Step, RejectsNonFinite) {
    const auto s = noiseless(1.0, 1.0);
    try {
        step(s, Vec2(NAN, 0.0), Vec2::Zero(), Vec2::Zero());
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "non-finite state/action");
    }
    EXPECT_THROW(step(s, Vec2::Zero(), Vec2(INFINITY, 0.0), Vec2::Zero()), Error);
}

TEST(CongestionReward, PeakWithIdentitySpread) {
    const auto p = CongestionReward::single(Vec2(0.3, 0.1), 1.0);
    EXPECT_NEAR(congestion_reward(p, Vec2(0.3, 0.1), 0.0, 1.0), 1.0 / (2.0 * std::numbers::pi), 1e-15);
}

TEST(CongestionReward, CrowdingFactor) {
    const auto p = CongestionReward::single(Vec2::Zero(), 0.1);
    const Vec2 x(0.05, -0.1);
    EXPECT_NEAR(congestion_reward(p, x, 1.0, 2.0), 0.25 * congestion_reward(p, x, 0.0, 2.0), 1e-15);
    EXPECT_LT(congestion_reward(p, x, 1e3, 1.0), 1e-3 * congestion_reward(p, x, 0.0, 1.0));
}

TEST(CongestionReward, BimodalIsSumOfHalves) {
    const auto p = CongestionReward::bimodal(Vec2(-1, 0), Vec2(0, 0), 0.3);
    const auto a = CongestionReward::single(Vec2(-1, 0), 0.3);
    const auto b = CongestionReward::single(Vec2(0, 0), 0.3);
    const Vec2 x(-0.4, 0.2);
    EXPECT_NEAR(congestion_reward(p, x, 0.7, 1.5),
                0.5 * (congestion_reward(a, x, 0.7, 1.5) + congestion_reward(b, x, 0.7, 1.5)), 1e-15);
}

TEST(CongestionReward, SingularSpread) {
    CongestionReward p = CongestionReward::single(Vec2::Zero(), 0.1);
    p.components[0].spread << 1.0, 1.0, 1.0, 1.0;
    EXPECT_THROW(congestion_reward(p, Vec2::Zero(), 0.0, 1.0), Error);
}

TEST(CongestionReward, StrictlyDecreasingInDensityAndBounded) {
    SplitMix64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0), m(0.0, 50.0), al(0.1, 3.0);
    const auto p = CongestionReward::single(Vec2(0.2, -0.3), 0.1);
    const double peak = 1.0 / (2.0 * std::numbers::pi * 0.1);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 x(0.2 + 0.5 * u(rng), -0.3 + 0.5 * u(rng));
        double m1 = m(rng), m2 = m(rng);
        if (m1 > m2) std::swap(m1, m2);
        if (m1 == m2) continue;
        const double a = al(rng);
        const double r1 = congestion_reward(p, x, m1, a);
        const double r2 = congestion_reward(p, x, m2, a);
        EXPECT_GT(r1, r2);
        EXPECT_GT(r1, 0.0);
        EXPECT_LE(r1, peak);
        EXPECT_TRUE(std::isfinite(r2));
    }
}

TEST(ControlCost, Examples) {
    const Eigen::Matrix2d r = 2.0 * Eigen::Matrix2d::Identity();
    EXPECT_EQ(control_cost(r, Vec2::Zero()), 0.0);
    EXPECT_DOUBLE_EQ(control_cost(r, Vec2(1, 1)), 2.0);
    SplitMix64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 u(n(rng), n(rng));
        EXPECT_EQ(control_cost(r, u), control_cost(r, -u));
    }
}

TEST(MovementCost, Shapes) {
    EnvSpec s = default_env(EnvKind::demand);
    s.eta = 2.0;
    EXPECT_DOUBLE_EQ(movement_cost(s, Vec2(1.0, 1.0)), 2.0);
    s.cost = CostShape::quartic;
    EXPECT_DOUBLE_EQ(movement_cost(s, Vec2(1.0, 1.0)), 8.0);
}

TEST(DemandPath, Interpolates) {
    DemandPath p;
    p.waypoints = {{0.0, Vec2(0, 0)}, {10.0, Vec2(1, 0)}};
    EXPECT_NEAR((p.at(5.0) - Vec2(0.5, 0.0)).norm(), 0.0, 1e-15);
    EXPECT_EQ(p.at(0.0), Vec2(0, 0));
    EXPECT_EQ(p.at(10.0), Vec2(1, 0));
    EXPECT_THROW(p.at(10.5), Error);
    EXPECT_THROW(p.at(-1.0), Error);
}

TEST(DemandPath, Validation) {
    DemandPath p;
    p.waypoints = {{0.0, Vec2(0, 0)}, {0.0, Vec2(1, 0)}};
    EXPECT_THROW(p.validate(1), Error);
    p.waypoints = {{0.0, Vec2(0, 0)}, {5.0, Vec2(1, 0)}};
    EXPECT_THROW(p.validate(6), Error);
    EXPECT_NO_THROW(p.validate(5));
}

TEST(DemandReward, OnPathPeakAndRadialDecay) {
    const auto s = default_env(EnvKind::demand);
    const double spread = 0.05;
    const Vec2 c = s.demand_path.at(12.0);
    EXPECT_NEAR(demand_reward(s.demand_path, spread, 12.0, c, 0.0, 0.1),
                1.0 / (2.0 * std::numbers::pi * spread), 1e-12);
    for (double angle = 0.0; angle < 6.28; angle += 0.5) {
        const Vec2 dir(std::cos(angle), std::sin(angle));
        double prev = demand_reward(s.demand_path, spread, 12.0, c, 0.0, 0.1);
        for (double r = 0.05; r < 2.0; r += 0.05) {
            const double v = demand_reward(s.demand_path, spread, 12.0, c + r * dir, 0.0, 0.1);
            EXPECT_LE(v, prev);
            prev = v;
        }
    }
    EXPECT_THROW(demand_reward(s.demand_path, spread, 31.0, c, 0.0, 0.1), Error);
}

TEST(DemandReward, ScaleMultiplies) {
    const auto s = default_env(EnvKind::demand);
    const Vec2 x(0.1, 0.0);
    EXPECT_NEAR(demand_reward(s.demand_path, 0.05, 3.0, x, 0.4, 0.1, 0.01),
                0.01 * demand_reward(s.demand_path, 0.05, 3.0, x, 0.4, 0.1), 1e-15);
}

TEST(DemandReward, StrictlyDecreasingInDensity) {
    const auto s = default_env(EnvKind::demand);
    const Vec2 x = s.demand_path.at(7.0) + Vec2(0.03, -0.02);
    double prev = demand_reward(s.demand_path, 0.05, 7.0, x, 0.0, 0.1);
    for (double m = 0.5; m < 100.0; m *= 1.7) {
        const double v = demand_reward(s.demand_path, 0.05, 7.0, x, m, 0.1);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(LqrReward, Examples) {
    LqrReward p;
    EXPECT_EQ(lqr_reward(p, p.target), 0.0);
    EXPECT_DOUBLE_EQ(lqr_reward(p, p.target + Vec2(1.0, 0.0)), -1.0);
    SplitMix64 rng(5);
    std::normal_distribution<double> n(0.0, 3.0);
    p.q << 2.0, 0.5, 0.5, 1.0;
    for (int i = 0; i < 200; ++i) EXPECT_LE(lqr_reward(p, Vec2(n(rng), n(rng))), 0.0);
}

TEST(StateReward, LqrIgnoresDensity) {
    const auto s = default_env(EnvKind::lqr);
    const Vec2 x(0.1, 0.2);
    EXPECT_EQ(state_reward(s, 3, x, 0.0), state_reward(s, 3, x, 40.0));
}

TEST(StepReward, IsStateRewardMinusMovement) {
    const auto s = default_env(EnvKind::demand);
    const Vec2 x(0.2, 0.1), u(0.3, -0.4);
    EXPECT_DOUBLE_EQ(step_reward(s, 4, x, u, 2.0), state_reward(s, 4, x, 2.0) - movement_cost(s, u));
}

TEST(SampleInitial, DegenerateAndMoments) {
    EnvSpec s = default_env(EnvKind::congestion);
    s.init_std = 0.0;
    SplitMix64 rng(1);
    EXPECT_EQ(sample_initial(s, rng), s.init_mean);

    s.init_std = 0.1;
    Vec2 sum = Vec2::Zero();
    for (int i = 0; i < 100000; ++i) sum += sample_initial(s, rng);
    EXPECT_LT((sum / 100000.0 - Vec2(1.0, 0.0)).norm(), 0.01);
}

TEST(SampleInitial, SeededSequenceRepeats) {
    const auto s = default_env(EnvKind::congestion);
    SplitMix64 a(99), b(99);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_initial(s, a), sample_initial(s, b));
}

TEST(DefaultEnv, ExperimentSettings) {
    const auto c = default_env(EnvKind::congestion);
    EXPECT_EQ(c.horizon, 1);
    EXPECT_EQ(c.eta, 0.0);
    EXPECT_EQ(c.gamma, 0.99);
    EXPECT_EQ(c.init_mean, Vec2(1.0, 0.0));
    EXPECT_EQ(c.init_std, 0.1);

    const auto b = default_env(EnvKind::congestion_bimodal);
    ASSERT_EQ(b.congestion.components.size(), 2u);
    EXPECT_EQ(b.congestion.components[0].mean, Vec2(-1.0, 0.0));
    EXPECT_EQ(b.congestion.components[1].mean, Vec2(0.0, 0.0));

    const auto d = default_env(EnvKind::demand);
    EXPECT_EQ(d.horizon, 30);
    EXPECT_EQ(d.eta, 2.0);
    EXPECT_EQ(d.alpha, 0.1);
    EXPECT_EQ(d.demand_path.at(0.0), Vec2(0.2, -0.2));
    EXPECT_LT((d.demand_path.at(15.0) - Vec2(0.2, 0.4)).norm(), 1e-15);
    EXPECT_EQ(d.demand_path.at(30.0), Vec2(0.8, 0.4));

    const auto l = default_env(EnvKind::lqr);
    EXPECT_EQ(l.lqr.target, Vec2(0.5, -0.5));
    EXPECT_EQ(l.noise, 0.1);
    for (auto k : {EnvKind::congestion, EnvKind::congestion_bimodal, EnvKind::demand, EnvKind::lqr}) {
        EXPECT_NO_THROW(default_env(k).validate());
    }
}

TEST(EnvSpec, Validation) {
    EnvSpec s = default_env(EnvKind::congestion);
    s.alpha = 0.0;
    EXPECT_THROW(s.validate(), Error);
    s = default_env(EnvKind::congestion);
    s.eta = -1.0;
    EXPECT_THROW(s.validate(), Error);
    s = default_env(EnvKind::congestion);
    s.gamma = 1.5;
    EXPECT_THROW(s.validate(), Error);
    s = default_env(EnvKind::lqr);
    s.lqr.q << 1.0, 0.0, 0.0, -1.0;
    EXPECT_THROW(s.validate(), Error);
}
