#pragma once

#include <Eigen/Core>

#include "mfrl/envs.hpp"

namespace mfrl {

// Discounted linear-quadratic regulator with the reward paid on arrival:
//   r = -(x' - target)^T Q (x' - target) - u^T R u,   x' = A x + B u + noise.
// R here is the full quadratic weight (the environment's 1/2 u^T R u maps to R/2).
struct LqrProblem {
    Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d b = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d q = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d r = 0.5 * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d noise_cov = 0.01 * Eigen::Matrix2d::Identity();
    Vec2 target = Vec2(0.5, -0.5);
    double gamma = 0.99;

    double tolerance = 1e-12;
    int max_iterations = 100000;
};

struct LqrSolution {
    // Optimal control u = -gain (x - target) - offset.
    Eigen::Matrix2d gain;
    Vec2 offset = Vec2::Zero();
    Eigen::Matrix2d value;    // quadratic part of the value function (P)
    Eigen::Matrix2d riccati;  // Q + gamma P, the Riccati matrix of the state-cost convention
    Vec2 mean = Vec2::Zero();
    Eigen::Matrix2d covariance;
    Vec2 variance = Vec2::Zero();  // diagonal of covariance
    int iterations = 0;
};

// Problem implied by an lqr environment (quadratic control cost only).
LqrProblem lqr_problem(const EnvSpec& spec);

// Iterates the Riccati map to a fixed point and derives the stationary law of
// the closed loop. Throws on an indefinite R, a non-PSD Q, a recursion that
// fails to converge, or an unstable closed loop.
LqrSolution solve_lqr(const LqrProblem& problem);

LqrSolution lqr_analytic(const EnvSpec& spec);

}  // namespace mfrl
