#include "mfrl/lqr.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "mfrl/error.hpp"

namespace mfrl {

namespace {

using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

bool positive_definite(const Eigen::Matrix2d& m) {
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
    return eig.eigenvalues().minCoeff() > 0.0;
}

bool positive_semidefinite(const Eigen::Matrix2d& m) {
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
    return eig.eigenvalues().minCoeff() >= -1e-12;
}

}  // namespace

LqrProblem lqr_problem(const EnvSpec& spec) {
    if (spec.kind != EnvKind::lqr) throw Error("lqr_analytic needs an lqr environment");
    if (spec.cost != CostShape::quadratic) throw Error("lqr_analytic needs a quadratic cost");
    LqrProblem p;
    p.a = spec.a * Eigen::Matrix2d::Identity();
    p.b = spec.b * Eigen::Matrix2d::Identity();
    p.q = spec.lqr.q;
    p.r = 0.5 * spec.eta * Eigen::Matrix2d::Identity();
    p.noise_cov = spec.noise * spec.noise * Eigen::Matrix2d::Identity();
    p.target = spec.lqr.target;
    p.gamma = spec.gamma;
    return p;
}

LqrSolution solve_lqr(const LqrProblem& pr) {
    if (!positive_definite(pr.r)) throw Error("R must be positive definite");
    if (!positive_semidefinite(pr.q)) throw Error("Q must be PSD");
    if (!(pr.gamma > 0.0 && pr.gamma <= 1.0)) throw Error("gamma must lie in (0, 1]");

    // Deviation e = x - target, augmented with a constant: y = (e, 1).
    //   e' = A e + B u + (A - I) target + noise
    Mat3 abar = Mat3::Zero();
    abar.topLeftCorner<2, 2>() = pr.a;
    abar.topRightCorner<2, 1>() = (pr.a - Eigen::Matrix2d::Identity()) * pr.target;
    abar(2, 2) = 1.0;
    Mat32 bbar = Mat32::Zero();
    bbar.topRows<2>() = pr.b;
    Mat3 qbar = Mat3::Zero();
    qbar.topLeftCorner<2, 2>() = pr.q;

    // Value -y^T P y (+ noise terms that do not affect the gain).
    Mat3 p = Mat3::Zero();
    Eigen::Matrix<double, 2, 3> k = Eigen::Matrix<double, 2, 3>::Zero();
    int it = 0;
    bool converged = false;
    for (; it < pr.max_iterations; ++it) {
        const Mat3 w = qbar + pr.gamma * p;
        const Eigen::Matrix2d h = pr.r + bbar.transpose() * w * bbar;
        k = h.ldlt().solve(bbar.transpose() * w * abar);
        const Mat3 closed = abar - bbar * k;
        Mat3 next = closed.transpose() * w * closed + k.transpose() * pr.r * k;
        next = 0.5 * (next + next.transpose());
        if (!next.allFinite()) break;
        const double change = (next - p).cwiseAbs().maxCoeff();
        p = next;
        if (change <= pr.tolerance * std::max(1.0, p.cwiseAbs().maxCoeff())) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) throw Error("Riccati recursion did not converge (not stabilizable)");

    LqrSolution sol;
    sol.iterations = it;
    sol.value = p.topLeftCorner<2, 2>();
    sol.riccati = pr.q + pr.gamma * sol.value;
    sol.gain = k.leftCols<2>();
    sol.offset = k.col(2);

    // Closed loop on the deviation: e' = M e + c + noise.
    const Eigen::Matrix2d m = pr.a - pr.b * sol.gain;
    const Vec2 c = (pr.a - Eigen::Matrix2d::Identity()) * pr.target - pr.b * sol.offset;
    Eigen::EigenSolver<Eigen::Matrix2d> eig(m);
    if (!(eig.eigenvalues().cwiseAbs().maxCoeff() < 1.0)) {
        throw Error("closed loop is not stable (not stabilizable)");
    }
    const Vec2 mean_dev = (Eigen::Matrix2d::Identity() - m).lu().solve(c);
    sol.mean = pr.target + mean_dev;

    // Lyapunov: S = M S M^T + noise, solved as vec(S) = (I - M (x) M)^-1 vec(noise).
    Eigen::Matrix4d kron;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) kron.block<2, 2>(2 * i, 2 * j) = m(i, j) * m;
    }
    Eigen::Vector4d rhs(pr.noise_cov(0, 0), pr.noise_cov(1, 0), pr.noise_cov(0, 1),
                        pr.noise_cov(1, 1));
    const Eigen::Vector4d vec = (Eigen::Matrix4d::Identity() - kron).lu().solve(rhs);
    sol.covariance << vec(0), vec(2), vec(1), vec(3);
    sol.covariance = 0.5 * (sol.covariance + sol.covariance.transpose());
    sol.variance = sol.covariance.diagonal();
    return sol;
}

LqrSolution lqr_analytic(const EnvSpec& spec) {
    spec.validate();
    return solve_lqr(lqr_problem(spec));
}

}  // namespace mfrl
