#pragma once

#include <string>

#include <Eigen/Core>

namespace stz {

enum class PortmanteauTest { LjungBox, McLeodLi };

std::string to_string(PortmanteauTest t);

struct PortmanteauResult {
    double statistic = 0.0;
    int lag = 0;
    int df = 0;
    double p_value = 1.0;
    PortmanteauTest test = PortmanteauTest::LjungBox;
};

/// Sample autocorrelations rho_1..rho_max_lag (mean-centered, denominator is
/// the full sum of squares). Throws ConstantSeries for zero variance.
Eigen::VectorXd acf(const Eigen::Ref<const Eigen::VectorXd>& x, int max_lag);

/// Q = n(n+2) sum_{k<=lag} rho_k^2 / (n-k), referred to chi-square with
/// lag - fitted_params degrees of freedom.
PortmanteauResult ljung_box(const Eigen::Ref<const Eigen::VectorXd>& x, int lag, int fitted_params = 0);

/// Ljung-Box on the centered squared series.
PortmanteauResult mcleod_li(const Eigen::Ref<const Eigen::VectorXd>& x, int lag, int fitted_params = 0);

/// Upper-tail chi-square probability P(X > q), X ~ chi2(df).
double chi_square_sf(double q, int df);

/// Upper-tail standard normal probability.
double normal_sf(double z);

}  // namespace stz
