#include "mfrl/envs.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "mfrl/error.hpp"

namespace mfrl {

namespace {

bool finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

double gaussian_bump(const RewardBump& bump, const Vec2& x) {
    const double det = bump.spread.determinant();
    if (!(det > 0.0) || !std::isfinite(det)) throw Error("singular reward spread");
    const Vec2 d = x - bump.mean;
    const double quad = d.dot(bump.spread.inverse() * d);
    return bump.scale * std::exp(-quad) / (2.0 * std::numbers::pi * std::sqrt(det));
}

}  // namespace

std::string_view to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::congestion: return "congestion";
        case EnvKind::congestion_bimodal: return "congestion-bimodal";
        case EnvKind::demand: return "demand";
        case EnvKind::lqr: return "lqr";
    }
    return "unknown";
}

CongestionReward CongestionReward::single(const Vec2& mean, double spread) {
    return {{RewardBump{mean, spread * Eigen::Matrix2d::Identity(), 1.0}}};
}

CongestionReward CongestionReward::bimodal(const Vec2& first, const Vec2& second, double spread) {
    const Eigen::Matrix2d s = spread * Eigen::Matrix2d::Identity();
    return {{RewardBump{first, s, 0.5}, RewardBump{second, s, 0.5}}};
}

Vec2 DemandPath::at(double t) const {
    if (waypoints.empty()) throw Error("demand path has no waypoints");
    if (t < start() || t > end()) throw Error("time step outside demand path coverage");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const auto& lo = waypoints[i - 1];
        const auto& hi = waypoints[i];
        if (t <= hi.t) {
            const double w = (t - lo.t) / (hi.t - lo.t);
            return lo.at + w * (hi.at - lo.at);
        }
    }
    return waypoints.back().at;
}

void DemandPath::validate(int horizon) const {
    if (waypoints.size() < 2) throw Error("demand path needs at least two waypoints");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (!(waypoints[i].t > waypoints[i - 1].t)) {
            throw Error("demand path time steps must be strictly increasing");
        }
    }
    if (start() > 0.0 || end() < horizon) throw Error("demand path must cover 0..horizon");
}

void EnvSpec::validate() const {
    if (horizon < 1) throw Error("horizon must be >= 1");
    if (!(eta >= 0.0)) throw Error("eta must be >= 0");
    if (!(alpha > 0.0)) throw Error("alpha must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("gamma must lie in (0, 1]");
    if (!(noise >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw Error("invalid dynamics coefficients");
    }
    if (!(init_std >= 0.0)) throw Error("init_std must be >= 0");
    switch (kind) {
        case EnvKind::congestion:
        case EnvKind::congestion_bimodal:
            if (congestion.components.empty()) throw Error("congestion reward has no components");
            for (const auto& c : congestion.components) {
                if (!(c.spread.determinant() > 0.0)) throw Error("singular reward spread");
            }
            break;
        case EnvKind::demand:
            demand_path.validate(horizon);
            if (!(demand_spread > 0.0)) throw Error("demand spread must be > 0");
            if (!(demand_scale > 0.0)) throw Error("demand scale must be > 0");
            break;
        case EnvKind::lqr: {
            if (!lqr.q.isApprox(lqr.q.transpose())) throw Error("Q must be symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(lqr.q);
            if (eig.eigenvalues().minCoeff() < -1e-12) throw Error("Q must be PSD");
            break;
        }
    }
}

EnvSpec default_env(EnvKind kind) {
    EnvSpec spec;
    spec.kind = kind;
    switch (kind) {
        case EnvKind::congestion:
            spec.horizon = 1;
            spec.eta = 0.0;
            spec.alpha = 1.0;
            spec.noise = 0.05;
            spec.congestion = CongestionReward::single(Vec2::Zero(), 0.1);
            spec.init_mean = Vec2(1.0, 0.0);
            spec.init_std = 0.1;
            break;
        case EnvKind::congestion_bimodal:
            spec.horizon = 1;
            spec.eta = 0.0;
            spec.alpha = 1.0;
            spec.noise = 0.05;
            spec.congestion = CongestionReward::bimodal(Vec2(-1.0, 0.0), Vec2(0.0, 0.0), 0.3);
            spec.init_mean = Vec2(1.0, 0.0);
            spec.init_std = 0.1;
            break;
        case EnvKind::demand:
            spec.horizon = 30;
            spec.eta = 2.0;
            spec.alpha = 0.1;
            spec.noise = 0.02;
            spec.demand_path.waypoints = {{0.0, Vec2(0.2, -0.2)},
                                          {15.0, Vec2(0.2, 0.4)},
                                          {30.0, Vec2(0.8, 0.4)}};
            spec.demand_spread = 0.05;
            spec.demand_scale = 0.01;
            spec.init_mean = Vec2(-0.2, 0.0);
            spec.init_std = 0.1;
            break;
        case EnvKind::lqr:
            spec.horizon = 30;
            spec.eta = 1.0;
            spec.alpha = 1.0;
            spec.noise = 0.1;
            spec.lqr = LqrReward{};
            spec.init_mean = Vec2(0.0, 0.0);
            spec.init_std = 0.1;
            break;
    }
    spec.gamma = 0.99;
    return spec;
}

Vec2 step(const EnvSpec& spec, const Vec2& x, const Vec2& u, const Vec2& noise) {
    if (!finite(x) || !finite(u) || !finite(noise)) throw Error("non-finite state/action");
    return spec.a * x + spec.b * u + spec.noise * noise;
}

double congestion_reward(const CongestionReward& params, const Vec2& x, double density,
                         double alpha) {
    if (!(density >= 0.0)) throw Error("density must be >= 0");
    if (!(alpha > 0.0)) throw Error("alpha must be > 0");
    double desirability = 0.0;
    for (const auto& bump : params.components) desirability += gaussian_bump(bump, x);
    return desirability / std::pow(1.0 + density, alpha);
}

double control_cost(const Eigen::Matrix2d& r, const Vec2& u) { return 0.5 * u.dot(r * u); }

double movement_cost(const EnvSpec& spec, const Vec2& u) {
    if (spec.cost == CostShape::quartic) {
        const double n2 = u.squaredNorm();
        return spec.eta * n2 * n2;
    }
    return control_cost(spec.eta * Eigen::Matrix2d::Identity(), u);
}

double demand_reward(const DemandPath& path, double spread, double t, const Vec2& x,
                     double density, double alpha, double scale) {
    auto reward = CongestionReward::single(path.at(t), spread);
    reward.components.front().scale = scale;
    return congestion_reward(reward, x, density, alpha);
}

double lqr_reward(const LqrReward& params, const Vec2& x) {
    const Vec2 d = x - params.target;
    return -d.dot(params.q * d);
}

double state_reward(const EnvSpec& spec, int t, const Vec2& x, double density) {
    switch (spec.kind) {
        case EnvKind::congestion:
        case EnvKind::congestion_bimodal:
            return congestion_reward(spec.congestion, x, density, spec.alpha);
        case EnvKind::demand:
            return demand_reward(spec.demand_path, spec.demand_spread, t, x, density, spec.alpha,
                                 spec.demand_scale);
        case EnvKind::lqr:
            return lqr_reward(spec.lqr, x);
    }
    return 0.0;
}

double step_reward(const EnvSpec& spec, int t, const Vec2& x_next, const Vec2& u,
                   double density) {
    return state_reward(spec, t, x_next, density) - movement_cost(spec, u);
}

}  // namespace mfrl
