#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfrl/error.hpp"
#include "mfrl/lqr.hpp"
#include "mfrl/rng.hpp"

using namespace mfrl;

namespace {

// Scalar discounted Riccati with A = B = Q = 1: P solves
// gamma P^2 + (r + 1 - r gamma) P - r = 0.
double scalar_gain(double r, double gamma) {
    const double b = r + 1.0 - r * gamma;
    const double p = (-b + std::sqrt(b * b + 4.0 * gamma * r)) / (2.0 * gamma);
    const double w = 1.0 + gamma * p;
    return w / (r + w);
}

}  // namespace

TEST(Lqr, ScalarGoldenRatio) {
    LqrProblem p;
    p.r = Eigen::Matrix2d::Identity();
    p.gamma = 1.0;
    const auto s = solve_lqr(p);
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    EXPECT_NEAR(s.riccati(0, 0), phi, 1e-10);
    EXPECT_NEAR(s.riccati(1, 1), phi, 1e-10);
    EXPECT_NEAR(s.riccati(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(s.gain(0, 0), phi / (1.0 + phi), 1e-10);
}

TEST(Lqr, MatchesClosedFormScalarGain) {
    for (double r : {0.1, 0.5, 2.0}) {
        for (double gamma : {0.5, 0.9, 0.99}) {
            LqrProblem p;
            p.r = r * Eigen::Matrix2d::Identity();
            p.gamma = gamma;
            const auto s = solve_lqr(p);
            EXPECT_NEAR(s.gain(0, 0), scalar_gain(r, gamma), 1e-10);
            EXPECT_NEAR(s.gain(0, 1), 0.0, 1e-12);
        }
    }
}

TEST(Lqr, NoiselessRegulatorSitsOnTarget) {
    EnvSpec spec = default_env(EnvKind::lqr);
    spec.noise = 0.0;
    const auto s = lqr_analytic(spec);
    EXPECT_LT((s.mean - spec.lqr.target).norm(), 1e-12);
    EXPECT_LT(s.covariance.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lqr, DefaultConfigReference) {
    const auto s = lqr_analytic(default_env(EnvKind::lqr));
    EXPECT_NEAR(s.gain(0, 0), 0.7314837126268497, 1e-12);
    EXPECT_NEAR(s.mean.x(), 0.5, 1e-12);
    EXPECT_NEAR(s.mean.y(), -0.5, 1e-12);
    // sigma^2 / (1 - (1 - k)^2) for the scalar closed loop
    const double m = 1.0 - s.gain(0, 0);
    EXPECT_NEAR(s.variance.x(), 0.01 / (1.0 - m * m), 1e-12);
    EXPECT_NEAR(s.variance.x(), 0.010777034960909286, 1e-12);
    EXPECT_NEAR(s.variance.y(), s.variance.x(), 1e-15);
    EXPECT_NEAR(s.offset.norm(), 0.0, 1e-12);
}

TEST(Lqr, StationaryLawMatchesSimulation) {
    EnvSpec spec = default_env(EnvKind::lqr);
    spec.a = 0.9;
    spec.b = 1.2;
    spec.lqr.q << 1.0, 0.3, 0.3, 0.5;
    const auto s = lqr_analytic(spec);
    SplitMix64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    Vec2 x = s.mean;
    Vec2 sum = Vec2::Zero();
    Eigen::Matrix2d outer = Eigen::Matrix2d::Zero();
    const int steps = 400000;
    for (int i = 0; i < steps; ++i) {
        const Vec2 u = -s.gain * (x - spec.lqr.target) - s.offset;
        x = step(spec, x, u, Vec2(n(rng), n(rng)));
        sum += x;
        outer += x * x.transpose();
    }
    const Vec2 mean = sum / steps;
    const Eigen::Matrix2d cov = outer / steps - mean * mean.transpose();
    EXPECT_LT((mean - s.mean).norm(), 2e-3);
    EXPECT_NEAR(cov(0, 0), s.covariance(0, 0), 0.03 * s.covariance(0, 0));
    EXPECT_NEAR(cov(1, 1), s.covariance(1, 1), 0.03 * s.covariance(1, 1));
    EXPECT_NEAR(cov(0, 1), s.covariance(0, 1), 0.03 * s.covariance(0, 0));
}

TEST(Lqr, GainIsOptimalAgainstPerturbations) {
    // discounted cost of u = -K e from a fixed start, noise-free
    EnvSpec spec = default_env(EnvKind::lqr);
    spec.noise = 0.0;
    const auto s = lqr_analytic(spec);
    auto cost = [&](const Eigen::Matrix2d& k) {
        Vec2 x(-1.0, 2.0);
        double total = 0.0, disc = 1.0;
        for (int t = 0; t < 3000; ++t) {
            const Vec2 u = -k * (x - spec.lqr.target);
            x = step(spec, x, u, Vec2::Zero());
            total += disc * (state_reward(spec, t + 1, x, 0.0) - movement_cost(spec, u));
            disc *= spec.gamma;
        }
        return total;
    };
    const double best = cost(s.gain);
    for (double d : {-0.05, 0.05}) {
        EXPECT_LT(cost(s.gain + d * Eigen::Matrix2d::Identity()), best);
    }
}

TEST(Lqr, Errors) {
    LqrProblem p;
    p.r = Eigen::Matrix2d::Zero();
    EXPECT_THROW(solve_lqr(p), Error);
    p = LqrProblem{};
    p.q << 1.0, 0.0, 0.0, -0.5;
    EXPECT_THROW(solve_lqr(p), Error);
    p = LqrProblem{};
    p.a = 2.0 * Eigen::Matrix2d::Identity();
    p.b = Eigen::Matrix2d::Zero();
    p.gamma = 1.0;
    try {
        solve_lqr(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("not stabilizable"), std::string::npos);
    }
    EXPECT_THROW(lqr_analytic(default_env(EnvKind::congestion)), Error);
}
