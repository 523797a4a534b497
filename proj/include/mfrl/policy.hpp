#pragma once

#include <random>

#include <Eigen/Core>

#include "mfrl/mlp.hpp"

namespace mfrl {

// Diagonal Gaussian policy: a ~ N(mean(x), std^2 I) with a fixed std.
struct GaussianPolicy {
    Mlp mean;
    double std = 0.1;
};

struct ActionSample {
    Eigen::VectorXd action;
    double log_prob = 0.0;
};

double log_prob(const GaussianPolicy& policy, const Eigen::VectorXd& x, const Eigen::VectorXd& a);

// log N(a; mean, std^2 I) for a precomputed mean.
double gaussian_log_density(const Eigen::VectorXd& a, const Eigen::VectorXd& mean, double std);

// Gradient of log pi(a|x) w.r.t. the mean network parameters: a backward
// pass with upstream (a - mean(x)) / std^2.
Eigen::VectorXd logprob_grad(const GaussianPolicy& policy, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& a);

template <class Rng>
ActionSample sample_action(const GaussianPolicy& policy, const Eigen::VectorXd& x, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ActionSample s;
    const Eigen::VectorXd mu = policy.mean.forward(x);
    s.action.resize(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) s.action[i] = mu[i] + policy.std * normal(rng);
    s.log_prob = gaussian_log_density(s.action, mu, policy.std);
    return s;
}

}  // namespace mfrl
