#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace stz {

struct GarchOrder {
    int m = 1;    ///< ARCH order
    int s_g = 1;  ///< GARCH order
};

/// sigma_t^2 = alpha0 + sum alpha_j r_{t-j}^2 + sum beta_j sigma_{t-j}^2
struct GarchParams {
    double alpha0 = 0.0;
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;

    /// Throws ConstraintViolation unless alpha0 > 0, alpha, beta >= 0 and
    /// sum(alpha) + sum(beta) < 1.
    void validate() const;
    double persistence() const { return alpha.sum() + beta.sum(); }
};

struct GarchFit {
    GarchOrder order;
    GarchParams params;
    Eigen::VectorXd cond_var;
    Eigen::VectorXd std_resid;
    double loglik = 0.0;
    /// Log-likelihood at the starting point the optimizer was launched from.
    double initial_loglik = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Conditional variance path. The first max(m, s_g) entries hold the sample
/// variance of r; when r has zero variance the model's unconditional
/// variance is used instead.
Eigen::VectorXd garch_filter(const Eigen::Ref<const Eigen::VectorXd>& r, const GarchParams& params);

/// Gaussian log-likelihood sum_t [-log(2 pi sigma_t^2)/2 - r_t^2 / (2 sigma_t^2)].
double garch_loglik(const Eigen::Ref<const Eigen::VectorXd>& r, const GarchParams& params);

struct GarchOptions {
    std::uint64_t seed = 1;
    int max_iterations = 500;
    /// Upper bound on sum(alpha) + sum(beta) inside the optimizer.
    double max_persistence = 0.9999;
};

/// Maximum-likelihood fit under the positivity and stationarity constraints.
/// Requires at least 30 observations (SeriesTooShort).
GarchFit fit_garch(const Eigen::Ref<const Eigen::VectorXd>& r, const GarchOrder& order = {},
                   const GarchOptions& opts = {});

}  // namespace stz
