#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mfrl/learner.hpp"

namespace mfrl {

// Mean Euclidean distance over all unordered pairs of columns.
double mean_pairwise_distance(const Eigen::Matrix2Xd& points);

// Mean distance between two independent draws from a grid measure, with each
// bin's mass placed at its center.
double mean_pairwise_distance(const DensityGrid& grid);

// Mass in the nearest-peak cell of each peak (ties go to the earlier peak).
std::vector<double> basin_shares(const DensityGrid& grid, std::span<const Vec2> peaks);
std::vector<double> basin_shares(const Eigen::Matrix2Xd& points, std::span<const Vec2> peaks);

struct ConvergenceSummary {
    int window = 0;
    double window_mean = 0.0;
    double window_std = 0.0;      // population std of mean_return over the window
    double return_range = 0.0;    // max - min of mean_return over the whole run
    double stabilization = 0.0;   // window_std / return_range (0 for a flat run)
    double dispersion = 0.0;      // mean pairwise distance of the terminal positions
    std::vector<double> drift;    // belief drift per episode
};

// Statistics over the last `window` episodes of a trace (the whole trace if
// shorter). `terminal` may be empty, in which case dispersion is 0.
ConvergenceSummary convergence_metrics(std::span<const TraceRow> trace,
                                       const Eigen::Matrix2Xd& terminal, int window = 200);

struct StationaryStats {
    Vec2 mean = Vec2::Zero();
    Vec2 variance = Vec2::Zero();  // per axis
    long samples = 0;
};

// Pools the agent positions at times burn_in..horizon of an episode.
StationaryStats stationary_statistics(const EpisodeLog& log, int burn_in);

}  // namespace mfrl
