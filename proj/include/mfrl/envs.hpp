#pragma once

#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mfrl/density_grid.hpp"

namespace mfrl {

enum class EnvKind { congestion, congestion_bimodal, demand, lqr };

std::string_view to_string(EnvKind kind);

enum class CostShape {
    quadratic,  // 1/2 u^T R u
    quartic,    // eta * |u|^4
};

// One Gaussian desirability bump. `scale` multiplies the normalized bump;
// the unimodal reward uses 1, each component of the two-peak mixture 1/2.
struct RewardBump {
    Vec2 mean = Vec2::Zero();
    Eigen::Matrix2d spread = 0.1 * Eigen::Matrix2d::Identity();
    double scale = 1.0;
};

struct CongestionReward {
    std::vector<RewardBump> components;

    static CongestionReward single(const Vec2& mean, double spread);
    static CongestionReward bimodal(const Vec2& first, const Vec2& second, double spread);
};

// Piecewise-linear path of the demand peak through time.
struct DemandPath {
    struct Waypoint {
        double t;
        Vec2 at;
    };
    std::vector<Waypoint> waypoints;

    Vec2 at(double t) const;
    double start() const { return waypoints.front().t; }
    double end() const { return waypoints.back().t; }
    void validate(int horizon) const;
};

struct LqrReward {
    Vec2 target = Vec2(0.5, -0.5);
    Eigen::Matrix2d q = Eigen::Matrix2d::Identity();
};

struct EnvSpec {
    EnvKind kind = EnvKind::congestion;
    int horizon = 1;

    // x' = a x + b u + noise * eps; all three act as multiples of I.
    double a = 1.0;
    double b = 1.0;
    double noise = 0.05;

    double eta = 0.0;    // R = eta * I
    double alpha = 1.0;  // crowd averseness
    double gamma = 0.99;
    CostShape cost = CostShape::quadratic;

    CongestionReward congestion = CongestionReward::single(Vec2::Zero(), 0.1);
    DemandPath demand_path;
    double demand_spread = 0.05;
    double demand_scale = 1.0;  // multiplies the demand peak
    LqrReward lqr;

    Vec2 init_mean = Vec2(1.0, 0.0);
    double init_std = 0.1;

    void validate() const;
};

EnvSpec default_env(EnvKind kind);

// x' = A x + B u + sigma1 * noise.
Vec2 step(const EnvSpec& spec, const Vec2& x, const Vec2& u, const Vec2& noise);

// Gaussian desirability discounted by crowding:
//   sum_i scale_i (2 pi sqrt|S_i|)^-1 exp(-(x-mu_i)^T S_i^-1 (x-mu_i)) / (1+m)^alpha
double congestion_reward(const CongestionReward& params, const Vec2& x, double density,
                         double alpha);

double control_cost(const Eigen::Matrix2d& r, const Vec2& u);

// Movement penalty for the environment's configured cost shape.
double movement_cost(const EnvSpec& spec, const Vec2& u);

// Congestion reward centred on path(t) with spread S = spread * I, times scale.
double demand_reward(const DemandPath& path, double spread, double t, const Vec2& x,
                     double density, double alpha, double scale = 1.0);

double lqr_reward(const LqrReward& params, const Vec2& x);

// State-dependent part of the reward for an agent that arrived at x at time
// t (t = 1..horizon), given the local density there.
double state_reward(const EnvSpec& spec, int t, const Vec2& x, double density);

// Full per-step reward: state_reward minus the movement cost of u.
double step_reward(const EnvSpec& spec, int t, const Vec2& x_next, const Vec2& u,
                   double density);

// Gaussian draw around the configured initial mean.
template <class Rng>
Vec2 sample_initial(const EnvSpec& spec, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double zx = normal(rng);
    const double zy = normal(rng);
    return spec.init_mean + spec.init_std * Vec2(zx, zy);
}

}  // namespace mfrl
