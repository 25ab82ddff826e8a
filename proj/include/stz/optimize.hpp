#pragma once

#include <functional>

#include <Eigen/Core>

namespace stz::optim {

struct Result {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Residual callback for least squares. Returning false marks x infeasible
/// (outside a barrier); the optimizer then treats the objective as +inf.
using ResidualFn = std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& residuals)>;

struct LmOptions {
    int max_iterations = 200;
    double ftol = 1e-12;  ///< relative sum-of-squares decrease
    double xtol = 1e-10;  ///< relative step size
    double initial_lambda = 1e-3;
};

/// Minimizes ||r(x)||^2 by Levenberg-Marquardt with a forward-difference
/// Jacobian. value is the final sum of squares. x0 must be feasible.
Result levenberg_marquardt(const ResidualFn& residuals, const Eigen::VectorXd& x0, const LmOptions& opts = {});

/// Scalar objective; may return +inf for infeasible points.
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x)>;

struct BfgsOptions {
    int max_iterations = 500;
    double gtol = 1e-6;   ///< infinity norm of the gradient
    double ftol = 1e-13;  ///< relative objective decrease over one iteration
};

/// Quasi-Newton minimization with central-difference gradients and
/// backtracking (Armijo) line search. Never returns a point worse than x0.
Result bfgs_minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0, const BfgsOptions& opts = {});

/// Central-difference gradient.
Eigen::VectorXd numeric_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x, double fx);

}  // namespace stz::optim
