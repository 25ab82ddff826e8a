#include "stz/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "stz/errors.hpp"

namespace stz {

std::string to_string(PortmanteauTest t) { return t == PortmanteauTest::LjungBox ? "LjungBox" : "McLeodLi"; }

Eigen::VectorXd acf(const Eigen::Ref<const Eigen::VectorXd>& x, int max_lag) {
    const Eigen::Index n = x.size();
    if (max_lag < 1) throw Error("acf: max_lag must be >= 1");
    if (n <= max_lag) throw SeriesTooShort("acf needs more observations than lags");
    const Eigen::VectorXd dev = x.array() - x.mean();
    const double denom = dev.squaredNorm();
    const double peak = x.cwiseAbs().maxCoeff();
    // Rounding leaves ~eps*|x| residue in the deviations of a constant series.
    const double floor = static_cast<double>(n) * std::pow(64.0 * std::numeric_limits<double>::epsilon() * peak, 2);
    if (!(denom > floor)) throw ConstantSeries();

    Eigen::VectorXd rho(max_lag);
    for (int k = 1; k <= max_lag; ++k) rho(k - 1) = dev.tail(n - k).dot(dev.head(n - k)) / denom;
    return rho;
}

double chi_square_sf(double q, int df) {
    if (df < 1) throw Error("chi-square degrees of freedom must be >= 1");
    if (!(q > 0)) return 1.0;
    if (std::isinf(q)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * q);
}

double normal_sf(double z) { return 0.5 * boost::math::erfc(z / std::sqrt(2.0)); }

PortmanteauResult ljung_box(const Eigen::Ref<const Eigen::VectorXd>& x, int lag, int fitted_params) {
    if (lag < 1) throw Error("ljung_box: lag must be >= 1");
    if (fitted_params < 0 || fitted_params >= lag) throw Error("ljung_box: fitted_params must be in [0, lag)");
    const Eigen::VectorXd rho = acf(x, lag);
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (int k = 1; k <= lag; ++k) sum += rho(k - 1) * rho(k - 1) / (n - k);

    PortmanteauResult res;
    res.statistic = n * (n + 2.0) * sum;
    res.lag = lag;
    res.df = lag - fitted_params;
    res.p_value = chi_square_sf(res.statistic, res.df);
    res.test = PortmanteauTest::LjungBox;
    return res;
}

PortmanteauResult mcleod_li(const Eigen::Ref<const Eigen::VectorXd>& x, int lag, int fitted_params) {
    // acf centers its input, so this is Ljung-Box on the centered squares.
    PortmanteauResult res = ljung_box(x.array().square().matrix(), lag, fitted_params);
    res.test = PortmanteauTest::McLeodLi;
    return res;
}

}  // namespace stz
