#include "stz/garch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "stz/errors.hpp"
#include "stz/optimize.hpp"

namespace stz {

void GarchParams::validate() const {
    if (!(alpha0 > 0) || !std::isfinite(alpha0)) throw ConstraintViolation("alpha0 must be positive");
    if ((alpha.array() < 0).any() || (beta.array() < 0).any()) {
        throw ConstraintViolation("alpha and beta must be nonnegative");
    }
    if (!(persistence() < 1.0)) throw ConstraintViolation("sum(alpha) + sum(beta) must be below 1");
}

namespace {

double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& r) {
    if (r.size() == 0) return 0.0;
    return (r.array() - r.mean()).square().mean();
}

// Unchecked recursion shared by the public entry points and the optimizer.
void filter_into(const Eigen::Ref<const Eigen::VectorXd>& r, double alpha0, const Eigen::VectorXd& alpha,
                 const Eigen::VectorXd& beta, double v0, Eigen::VectorXd& s2) {
    const Eigen::Index n = r.size();
    const Eigen::Index lead = std::max(alpha.size(), beta.size());
    s2.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        if (t < lead) {
            s2(t) = v0;
            continue;
        }
        double v = alpha0;
        for (Eigen::Index j = 0; j < alpha.size(); ++j) v += alpha(j) * r(t - j - 1) * r(t - j - 1);
        for (Eigen::Index j = 0; j < beta.size(); ++j) v += beta(j) * s2(t - j - 1);
        s2(t) = v;
    }
}

double presample_variance(const Eigen::Ref<const Eigen::VectorXd>& r, const GarchParams& p) {
    const double v0 = sample_variance(r);
    return v0 > 0 ? v0 : p.alpha0 / (1.0 - p.persistence());
}

double loglik_from(const Eigen::Ref<const Eigen::VectorXd>& r, const Eigen::VectorXd& s2) {
    constexpr double log2pi = 1.8378770664093453;  // log(2 pi)
    double ll = 0.0;
    for (Eigen::Index t = 0; t < r.size(); ++t) ll += -0.5 * (log2pi + std::log(s2(t))) - r(t) * r(t) / (2.0 * s2(t));
    return ll;
}

struct Reparam {
    int m;
    int s;
    double cap;

    // z = [log alpha0, u_1..u_{m+s}]; weights = cap * softmax(u, 0).
    GarchParams decode(const Eigen::VectorXd& z) const {
        GarchParams p;
        p.alpha0 = std::exp(z(0));
        const Eigen::Index k = m + s;
        const double zmax = std::max(0.0, z.tail(k).maxCoeff());
        Eigen::VectorXd e = (z.tail(k).array() - zmax).exp();
        const double denom = std::exp(-zmax) + e.sum();
        e *= cap / denom;
        p.alpha = e.head(m);
        p.beta = e.tail(s);
        return p;
    }

    Eigen::VectorXd encode(double alpha0, double alpha_total, double beta_total) const {
        Eigen::VectorXd z(1 + m + s);
        z(0) = std::log(alpha0);
        const double slack = 1.0 - (alpha_total + beta_total) / cap;
        for (int j = 0; j < m; ++j) z(1 + j) = std::log(alpha_total / m / cap / slack);
        for (int j = 0; j < s; ++j) z(1 + m + j) = std::log(beta_total / s / cap / slack);
        return z;
    }
};

}  // namespace

Eigen::VectorXd garch_filter(const Eigen::Ref<const Eigen::VectorXd>& r, const GarchParams& params) {
    params.validate();
    Eigen::VectorXd s2;
    filter_into(r, params.alpha0, params.alpha, params.beta, presample_variance(r, params), s2);
    return s2;
}

double garch_loglik(const Eigen::Ref<const Eigen::VectorXd>& r, const GarchParams& params) {
    return loglik_from(r, garch_filter(r, params));
}

GarchFit fit_garch(const Eigen::Ref<const Eigen::VectorXd>& r, const GarchOrder& order, const GarchOptions& opts) {
    if (order.m < 1 || order.s_g < 1) throw Error("GARCH orders must be >= 1");
    if (r.size() < 30) throw SeriesTooShort("GARCH fitting needs at least 30 observations");
    if (!r.allFinite()) throw OptimizerFailure("series contains non-finite values");
    const double v0 = sample_variance(r);
    if (!(v0 > 0)) throw ConstantSeries();

    // Work on the unit-variance series so the fit is exactly scale equivariant.
    const double scale = std::sqrt(v0);
    const Eigen::VectorXd rs = r / scale;
    const double v0s = sample_variance(rs);
    const Reparam rp{order.m, order.s_g, opts.max_persistence};

    Eigen::VectorXd s2;
    const optim::ObjectiveFn objective = [&](const Eigen::VectorXd& z) {
        if (!z.allFinite() || z(0) > 50.0 || z(0) < -50.0) return std::numeric_limits<double>::infinity();
        const GarchParams p = rp.decode(z);
        filter_into(rs, p.alpha0, p.alpha, p.beta, v0s, s2);
        const double ll = loglik_from(rs, s2);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    // Deterministic starting grid; the two best launch the optimizer.
    constexpr std::array<std::array<double, 2>, 5> grid = {
        {{0.1, 0.8}, {0.05, 0.9}, {0.2, 0.6}, {0.15, 0.4}, {0.05, 0.05}}};
    std::vector<std::pair<double, Eigen::VectorXd>> starts;
    for (const auto& [a, b] : grid) {
        Eigen::VectorXd z = rp.encode(v0s * (1.0 - a - b), a, b);
        starts.emplace_back(objective(z), std::move(z));
    }
    std::stable_sort(starts.begin(), starts.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });

    optim::BfgsOptions bo;
    bo.max_iterations = opts.max_iterations;
    optim::Result best;
    best.value = std::numeric_limits<double>::infinity();
    double initial = starts.front().first;
    for (std::size_t i = 0; i < 2 && i < starts.size(); ++i) {
        if (!std::isfinite(starts[i].first)) continue;
        optim::Result res = optim::bfgs_minimize(objective, starts[i].second, bo);
        if (res.value < best.value) best = res;
    }
    if (!best.converged) {
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> jitter(0.0, 0.3);
        Eigen::VectorXd z = best.x;
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) += jitter(rng);
        if (std::isfinite(objective(z))) {
            optim::Result res = optim::bfgs_minimize(objective, z, bo);
            if (res.value < best.value || (res.converged && res.value <= best.value + 1e-9)) best = res;
        }
    }
    if (!std::isfinite(best.value)) throw OptimizerFailure("GARCH likelihood not finite at any start");

    GarchFit fit;
    fit.order = order;
    fit.params = rp.decode(best.x);
    fit.params.alpha0 *= v0;
    fit.converged = best.converged;
    fit.iterations = best.iterations;
    filter_into(r, fit.params.alpha0, fit.params.alpha, fit.params.beta, v0, fit.cond_var);
    fit.std_resid = r.array() / fit.cond_var.array().sqrt();
    fit.loglik = loglik_from(r, fit.cond_var);
    fit.initial_loglik = -initial - static_cast<double>(r.size()) * std::log(scale);
    return fit;
}

}  // namespace stz
