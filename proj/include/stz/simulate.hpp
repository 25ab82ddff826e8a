#pragma once

#include <random>

#include <Eigen/Core>

namespace stz::sim {

using Rng = std::mt19937_64;

Eigen::VectorXd gaussian(Eigen::Index n, Rng& rng, double sd = 1.0);

/// ARMA recursion x_t - mu = sum ar_k (x_{t-k} - mu) + w_t - sum ma_k w_{t-k}
/// driven by the given innovations; the first `burn` values are discarded.
Eigen::VectorXd arma(const Eigen::Ref<const Eigen::VectorXd>& ar, const Eigen::Ref<const Eigen::VectorXd>& ma,
                     double mu, const Eigen::Ref<const Eigen::VectorXd>& innovations, Eigen::Index burn = 0);

struct GarchPath {
    Eigen::VectorXd r;
    Eigen::VectorXd sigma2;
};

/// GARCH(m,s) path started at the unconditional variance, after `burn` steps.
GarchPath garch(double alpha0, const Eigen::Ref<const Eigen::VectorXd>& alpha,
                const Eigen::Ref<const Eigen::VectorXd>& beta, Eigen::Index n, Rng& rng, Eigen::Index burn = 500);

/// Running sum with x_0 = start + d_0.
Eigen::VectorXd cumulate(const Eigen::Ref<const Eigen::VectorXd>& diffs, double start = 0.0);

}  // namespace stz::sim
