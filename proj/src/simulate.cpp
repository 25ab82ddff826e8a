#include "stz/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace stz::sim {

Eigen::VectorXd gaussian(Eigen::Index n, Rng& rng, double sd) {
    std::normal_distribution<double> dist(0.0, sd);
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = dist(rng);
    return out;
}

Eigen::VectorXd arma(const Eigen::Ref<const Eigen::VectorXd>& ar, const Eigen::Ref<const Eigen::VectorXd>& ma,
                     double mu, const Eigen::Ref<const Eigen::VectorXd>& innovations, Eigen::Index burn) {
    const Eigen::Index n = innovations.size();
    Eigen::VectorXd dev = Eigen::VectorXd::Zero(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        double v = innovations(t);
        for (Eigen::Index k = 0; k < ar.size() && k < t; ++k) v += ar(k) * dev(t - k - 1);
        for (Eigen::Index k = 0; k < ma.size() && k < t; ++k) v -= ma(k) * innovations(t - k - 1);
        dev(t) = v;
    }
    return (dev.tail(n - burn).array() + mu).matrix();
}

GarchPath garch(double alpha0, const Eigen::Ref<const Eigen::VectorXd>& alpha,
                const Eigen::Ref<const Eigen::VectorXd>& beta, Eigen::Index n, Rng& rng, Eigen::Index burn) {
    const double persistence = alpha.sum() + beta.sum();
    const double uncond = alpha0 / (1.0 - persistence);
    const Eigen::Index total = n + burn;
    const Eigen::Index lead = std::max(alpha.size(), beta.size());
    std::normal_distribution<double> dist;
    Eigen::VectorXd r(total + lead), s2(total + lead);
    for (Eigen::Index t = 0; t < lead; ++t) {
        s2(t) = uncond;
        r(t) = std::sqrt(uncond) * dist(rng);
    }
    for (Eigen::Index t = lead; t < total + lead; ++t) {
        double v = alpha0;
        for (Eigen::Index j = 0; j < alpha.size(); ++j) v += alpha(j) * r(t - j - 1) * r(t - j - 1);
        for (Eigen::Index j = 0; j < beta.size(); ++j) v += beta(j) * s2(t - j - 1);
        s2(t) = v;
        r(t) = std::sqrt(v) * dist(rng);
    }
    return {r.tail(n), s2.tail(n)};
}

Eigen::VectorXd cumulate(const Eigen::Ref<const Eigen::VectorXd>& diffs, double start) {
    Eigen::VectorXd out(diffs.size());
    double acc = start;
    for (Eigen::Index i = 0; i < diffs.size(); ++i) {
        acc += diffs(i);
        out(i) = acc;
    }
    return out;
}

}  // namespace stz::sim
