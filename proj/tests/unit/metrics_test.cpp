#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfrl/error.hpp"
#include "mfrl/metrics.hpp"

using namespace mfrl;

TEST(Dispersion, UnitSquareCorners) {
    Eigen::Matrix2Xd pts(2, 4);
    pts << 0, 1, 0, 1,
           0, 0, 1, 1;
    EXPECT_NEAR(mean_pairwise_distance(pts), (4.0 + 2.0 * std::sqrt(2.0)) / 6.0, 1e-15);
    EXPECT_NEAR(mean_pairwise_distance(pts), 1.138, 1e-3);
}

TEST(Dispersion, DegenerateSets) {
    EXPECT_EQ(mean_pairwise_distance(Eigen::Matrix2Xd(2, 0)), 0.0);
    EXPECT_EQ(mean_pairwise_distance(Eigen::Matrix2Xd::Ones(2, 1)), 0.0);
    EXPECT_EQ(mean_pairwise_distance(Eigen::Matrix2Xd::Ones(2, 9)), 0.0);
}

TEST(Dispersion, GridFormMatchesPointsAtBinCenters) {
    // points placed on bin centers give the same pairwise mean, counting
    // same-bin pairs as zero distance and including i == j draws
    const GridShape shape{{0.0, 4.0, 0.0, 2.0}, 4, 2};
    std::vector<Vec2> pts{shape.bin_center(0, 0), shape.bin_center(3, 1), shape.bin_center(3, 1),
                          shape.bin_center(1, 0)};
    const auto grid = build_empirical_measure(pts, shape);
    double total = 0.0;
    for (const auto& a : pts) {
        for (const auto& b : pts) total += (a - b).norm();
    }
    EXPECT_NEAR(mean_pairwise_distance(grid), total / 16.0, 1e-14);
    EXPECT_EQ(mean_pairwise_distance(DensityGrid::dirac(shape, Vec2(1.2, 0.3))), 0.0);
}

TEST(BasinShares, GridAndPoints) {
    const GridShape shape{{-2.0, 2.0, -1.0, 1.0}, 8, 2};
    const std::vector<Vec2> peaks{Vec2(-1, 0), Vec2(0, 0)};
    std::vector<Vec2> pts{Vec2(-1.2, 0.1), Vec2(-0.9, -0.4), Vec2(0.1, 0.2), Vec2(1.7, -0.9)};
    const auto grid_share = basin_shares(build_empirical_measure(pts, shape), peaks);
    EXPECT_NEAR(grid_share[0], 0.5, 1e-15);
    EXPECT_NEAR(grid_share[1], 0.5, 1e-15);

    Eigen::Matrix2Xd m(2, 4);
    for (int j = 0; j < 4; ++j) m.col(j) = pts[j];
    const auto point_share = basin_shares(m, peaks);
    EXPECT_DOUBLE_EQ(point_share[0], 0.5);
    EXPECT_DOUBLE_EQ(point_share[1], 0.5);

    // the midpoint goes to the earlier peak
    Eigen::Matrix2Xd mid(2, 1);
    mid << -0.5, 0.0;
    EXPECT_EQ(basin_shares(mid, peaks)[0], 1.0);
    EXPECT_THROW(basin_shares(m, std::vector<Vec2>{}), Error);
}

TEST(ConvergenceMetrics, ConstantTrace) {
    std::vector<TraceRow> trace(50);
    for (int i = 0; i < 50; ++i) trace[i] = {i, 3.5, 0.0, 0.1, 0.2};
    const auto s = convergence_metrics(trace, Eigen::Matrix2Xd::Zero(2, 3), 20);
    EXPECT_EQ(s.window, 20);
    EXPECT_EQ(s.window_std, 0.0);
    EXPECT_EQ(s.window_mean, 3.5);
    EXPECT_EQ(s.return_range, 0.0);
    EXPECT_EQ(s.stabilization, 0.0);
    for (double d : s.drift) EXPECT_EQ(d, 0.0);
}

TEST(ConvergenceMetrics, WindowStatistics) {
    std::vector<TraceRow> trace;
    for (int i = 0; i < 10; ++i) trace.push_back({i, static_cast<double>(i), 0.0, 0.0, 0.0});
    const auto s = convergence_metrics(trace, Eigen::Matrix2Xd::Zero(2, 1), 4);
    EXPECT_DOUBLE_EQ(s.window_mean, 7.5);
    EXPECT_DOUBLE_EQ(s.window_std, std::sqrt(1.25));
    EXPECT_DOUBLE_EQ(s.return_range, 9.0);
    EXPECT_DOUBLE_EQ(s.stabilization, std::sqrt(1.25) / 9.0);
    EXPECT_THROW(convergence_metrics(std::vector<TraceRow>{}, Eigen::Matrix2Xd::Zero(2, 1), 4), Error);
}

TEST(StationaryStatistics, PooledMoments) {
    EpisodeLog log;
    log.horizon = 2;
    log.agents = 2;
    log.states.assign(3, Eigen::Matrix2Xd(2, 2));
    log.states[0] << 9, 9, 9, 9;
    log.states[1] << 0, 2, 1, 1;
    log.states[2] << 1, 1, 0, 2;
    const auto s = stationary_statistics(log, 1);
    EXPECT_EQ(s.samples, 4);
    EXPECT_DOUBLE_EQ(s.mean.x(), 1.0);
    EXPECT_DOUBLE_EQ(s.mean.y(), 1.0);
    EXPECT_DOUBLE_EQ(s.variance.x(), 0.5);
    EXPECT_DOUBLE_EQ(s.variance.y(), 0.5);
    EXPECT_THROW(stationary_statistics(log, 3), Error);
}
