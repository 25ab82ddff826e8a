#pragma once

// Independent reference implementations used by the tests. They work on
// dense matrices with plain loops and share no code with the library.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace oracle {

inline double mean(const Eigen::VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i);
    return s / static_cast<double>(v.size());
}

/// (sum_ij w_ij z_i z_j / S0) / (sum_i z_i^2 / n)
inline double moran(const Eigen::VectorXd& x, const Eigen::MatrixXd& W) {
    const Eigen::Index n = x.size();
    const double m = mean(x);
    double num = 0.0, s0 = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            num += W(i, j) * (x(i) - m) * (x(j) - m);
            s0 += W(i, j);
        }
        den += (x(i) - m) * (x(i) - m);
    }
    return (num / s0) / (den / static_cast<double>(n));
}

/// I_i = (x_i - mean)/S_i^2 * sum_{j != i} w_ij (x_j - mean),
/// S_i^2 = sum_{j != i} (x_j - mean)^2 / (n - 1)
inline Eigen::VectorXd local_moran(const Eigen::VectorXd& x, const Eigen::MatrixXd& W) {
    const Eigen::Index n = x.size();
    const double m = mean(x);
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s2 = 0.0, lag = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            s2 += (x(j) - m) * (x(j) - m);
            lag += W(i, j) * (x(j) - m);
        }
        s2 /= static_cast<double>(n - 1);
        out(i) = (x(i) - m) / s2 * lag;
    }
    return out;
}

/// Sample autocorrelation at lag k with the full-sum-of-squares denominator.
inline double acf(const Eigen::VectorXd& x, int k) {
    const double m = mean(x);
    double num = 0.0, den = 0.0;
    for (Eigen::Index t = 0; t < x.size(); ++t) den += (x(t) - m) * (x(t) - m);
    for (Eigen::Index t = k; t < x.size(); ++t) num += (x(t) - m) * (x(t - k) - m);
    return num / den;
}

inline double ljung_box_q(const Eigen::VectorXd& x, int lag) {
    const double n = static_cast<double>(x.size());
    double q = 0.0;
    for (int k = 1; k <= lag; ++k) {
        const double r = acf(x, k);
        q += r * r / (n - k);
    }
    return n * (n + 2.0) * q;
}

/// Asymptotic Kolmogorov distribution tail P(K > lambda).
inline double kolmogorov_sf(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample KS test of the sample against the CDF F, using the
/// Stephens small-sample correction of the asymptotic tail.
template <typename Cdf>
KsResult ks_test(std::vector<double> sample, Cdf F) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    // Over each distinct value v with sample[lo..hi) == v, compare the ECDF
    // at v and just below v with F(v) and its left limit (F may be discrete).
    for (std::size_t lo = 0; lo < sample.size();) {
        std::size_t hi = lo + 1;
        while (hi < sample.size() && sample[hi] == sample[lo]) ++hi;
        const double v = sample[lo];
        d = std::max(d, std::abs(static_cast<double>(hi) / n - F(v)));
        d = std::max(d, std::abs(static_cast<double>(lo) / n - F(std::nextafter(v, -INFINITY))));
        lo = hi;
    }
    const double sq = std::sqrt(n);
    return {d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)};
}

}  // namespace oracle
