#include "mfrl/policy.hpp"

#include <cmath>
#include <numbers>

#include "mfrl/error.hpp"

namespace mfrl {

double gaussian_log_density(const Eigen::VectorXd& a, const Eigen::VectorXd& mean, double std) {
    if (a.size() != mean.size()) throw ShapeError("action dimension mismatch");
    const double var = std * std;
    const double norm = std::log(std * std::sqrt(2.0 * std::numbers::pi));
    return -(a - mean).squaredNorm() / (2.0 * var) - static_cast<double>(a.size()) * norm;
}

double log_prob(const GaussianPolicy& policy, const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    return gaussian_log_density(a, policy.mean.forward(x), policy.std);
}

Eigen::VectorXd logprob_grad(const GaussianPolicy& policy, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& a) {
    const Eigen::VectorXd mu = policy.mean.forward(x);
    if (a.size() != mu.size()) throw ShapeError("action dimension mismatch");
    const Eigen::VectorXd upstream = (a - mu) / (policy.std * policy.std);
    return backward(policy.mean, x, upstream).params;
}

}  // namespace mfrl
