#include "stz/optimize.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace stz::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sum_squares(const ResidualFn& f, const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    if (!f(x, r)) return kInf;
    const double ss = r.squaredNorm();
    return std::isfinite(ss) ? ss : kInf;
}

}  // namespace

Result levenberg_marquardt(const ResidualFn& residuals, const Eigen::VectorXd& x0, const LmOptions& opts) {
    Result res;
    res.x = x0;
    Eigen::VectorXd r;
    double ss = sum_squares(residuals, res.x, r);
    res.value = ss;
    if (!std::isfinite(ss)) return res;

    const Eigen::Index k = x0.size();
    if (k == 0) {
        res.converged = true;
        return res;
    }
    Eigen::MatrixXd jac(r.size(), k);
    Eigen::VectorXd r_step(r.size());
    Eigen::VectorXd r_trial;
    double lambda = opts.initial_lambda;

    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        for (Eigen::Index j = 0; j < k; ++j) {
            Eigen::VectorXd xh = res.x;
            double h = 1e-7 * std::max(1.0, std::abs(res.x(j)));
            xh(j) += h;
            if (!std::isfinite(sum_squares(residuals, xh, r_step))) {
                xh(j) = res.x(j) - h;
                h = -h;
                if (!std::isfinite(sum_squares(residuals, xh, r_step))) {
                    jac.col(j).setZero();
                    continue;
                }
            }
            jac.col(j) = (r_step - r) / h;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;

        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd a = jtj;
            for (Eigen::Index j = 0; j < k; ++j) a(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            const Eigen::VectorXd step = a.ldlt().solve(-grad);
            if (!step.allFinite()) {
                lambda *= 10;
                continue;
            }
            const Eigen::VectorXd x_trial = res.x + step;
            const double ss_trial = sum_squares(residuals, x_trial, r_trial);
            if (ss_trial < ss) {
                const double decrease = ss - ss_trial;
                const bool small_step = step.norm() <= opts.xtol * (res.x.norm() + opts.xtol);
                res.x = x_trial;
                r = r_trial;
                ss = ss_trial;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (decrease <= opts.ftol * ss || small_step) {
                    res.value = ss;
                    res.converged = true;
                    ++res.iterations;
                    return res;
                }
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // No descent direction at numerical precision: a stationary point
            // or a point pressed against the feasibility barrier.
            res.value = ss;
            res.converged = true;
            return res;
        }
    }
    res.value = ss;
    return res;
}

Eigen::VectorXd numeric_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x, double fx) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(x(j)));
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const double fp = f(xp);
        const double fm = f(xm);
        if (std::isfinite(fp) && std::isfinite(fm)) {
            g(j) = (fp - fm) / (2 * h);
        } else if (std::isfinite(fp)) {
            g(j) = (fp - fx) / h;
        } else if (std::isfinite(fm)) {
            g(j) = (fx - fm) / h;
        } else {
            g(j) = 0.0;
        }
    }
    return g;
}

Result bfgs_minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0, const BfgsOptions& opts) {
    Result res;
    res.x = x0;
    double fx = f(x0);
    res.value = fx;
    if (!std::isfinite(fx)) return res;

    const Eigen::Index k = x0.size();
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(k, k);
    Eigen::VectorXd g = numeric_gradient(f, res.x, fx);

    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        if (g.lpNorm<Eigen::Infinity>() < opts.gtol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd dir = -hinv * g;
        double slope = g.dot(dir);
        if (!(slope < 0)) {
            hinv.setIdentity();
            dir = -g;
            slope = -g.squaredNorm();
        }
        double t = 1.0;
        double f_new = kInf;
        Eigen::VectorXd x_new;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = res.x + t * dir;
            f_new = f(x_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * t * slope) break;
            t *= 0.5;
        }
        if (!std::isfinite(f_new) || f_new > fx) {
            // Line search failed; retry once along steepest descent before giving up.
            if (hinv.isIdentity()) {
                res.converged = g.lpNorm<Eigen::Infinity>() < 1e3 * opts.gtol;
                break;
            }
            hinv.setIdentity();
            continue;
        }
        const Eigen::VectorXd g_new = numeric_gradient(f, x_new, f_new);
        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        const double decrease = fx - f_new;
        res.x = x_new;
        fx = f_new;
        g = g_new;
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(k, k);
            hinv = (ident - rho * s * y.transpose()) * hinv * (ident - rho * y * s.transpose()) +
                   rho * s * s.transpose();
        }
        if (decrease <= opts.ftol * (std::abs(fx) + opts.ftol)) {
            res.converged = true;
            ++res.iterations;
            break;
        }
    }
    res.value = fx;
    return res;
}

}  // namespace stz::optim
