#include "mfrl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mfrl/error.hpp"

namespace mfrl {

double mean_pairwise_distance(const Eigen::Matrix2Xd& points) {
    const Eigen::Index n = points.cols();
    if (n < 2) return 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) total += (points.col(i) - points.col(j)).norm();
    }
    return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double mean_pairwise_distance(const DensityGrid& grid) {
    std::vector<Vec2> at;
    std::vector<double> w;
    for (int iy = 0; iy < grid.y_bins(); ++iy) {
        for (int ix = 0; ix < grid.x_bins(); ++ix) {
            const double m = grid.mass_at(ix, iy);
            if (m > 0.0) {
                at.push_back(grid.shape().bin_center(ix, iy));
                w.push_back(m);
            }
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        for (std::size_t j = i + 1; j < at.size(); ++j) total += w[i] * w[j] * (at[i] - at[j]).norm();
    }
    return 2.0 * total;
}

namespace {

std::size_t nearest(const Vec2& x, std::span<const Vec2> peaks) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < peaks.size(); ++p) {
        if ((x - peaks[p]).squaredNorm() < (x - peaks[best]).squaredNorm()) best = p;
    }
    return best;
}

}  // namespace

std::vector<double> basin_shares(const DensityGrid& grid, std::span<const Vec2> peaks) {
    if (peaks.empty()) throw Error("no peaks");
    std::vector<double> share(peaks.size(), 0.0);
    for (int iy = 0; iy < grid.y_bins(); ++iy) {
        for (int ix = 0; ix < grid.x_bins(); ++ix) {
            share[nearest(grid.shape().bin_center(ix, iy), peaks)] += grid.mass_at(ix, iy);
        }
    }
    return share;
}

std::vector<double> basin_shares(const Eigen::Matrix2Xd& points, std::span<const Vec2> peaks) {
    if (peaks.empty()) throw Error("no peaks");
    if (points.cols() == 0) throw Error("empty population");
    std::vector<double> share(peaks.size(), 0.0);
    for (Eigen::Index j = 0; j < points.cols(); ++j) share[nearest(points.col(j), peaks)] += 1.0;
    for (auto& s : share) s /= static_cast<double>(points.cols());
    return share;
}

ConvergenceSummary convergence_metrics(std::span<const TraceRow> trace,
                                       const Eigen::Matrix2Xd& terminal, int window) {
    if (trace.empty()) throw Error("empty trace");
    ConvergenceSummary s;
    s.window = std::min<int>(std::max(window, 1), static_cast<int>(trace.size()));
    const auto tail = trace.subspan(trace.size() - s.window);
    for (const auto& r : tail) s.window_mean += r.mean_return;
    s.window_mean /= s.window;
    for (const auto& r : tail) s.window_std += (r.mean_return - s.window_mean) * (r.mean_return - s.window_mean);
    s.window_std = std::sqrt(s.window_std / s.window);
    const auto [lo, hi] = std::minmax_element(
        trace.begin(), trace.end(),
        [](const TraceRow& a, const TraceRow& b) { return a.mean_return < b.mean_return; });
    s.return_range = hi->mean_return - lo->mean_return;
    s.stabilization = s.return_range > 0.0 ? s.window_std / s.return_range : 0.0;
    s.dispersion = mean_pairwise_distance(terminal);
    s.drift.reserve(trace.size());
    for (const auto& r : trace) s.drift.push_back(r.belief_drift);
    return s;
}

StationaryStats stationary_statistics(const EpisodeLog& log, int burn_in) {
    if (burn_in < 0 || burn_in > log.horizon) throw Error("burn-in outside the episode");
    StationaryStats s;
    for (int k = burn_in; k <= log.horizon; ++k) {
        s.mean += log.states[k].rowwise().sum();
        s.samples += log.states[k].cols();
    }
    s.mean /= static_cast<double>(s.samples);
    for (int k = burn_in; k <= log.horizon; ++k) {
        s.variance += (log.states[k].colwise() - s.mean).rowwise().squaredNorm();
    }
    s.variance /= static_cast<double>(s.samples);
    return s;
}

}  // namespace mfrl
