#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stz/ingest.hpp"

namespace stz {

/// Main-effect covariate names, in design-matrix order.
inline constexpr std::array<std::string_view, 12> kCovariateNames = {
    "ResidentialPct", "CommercialPct",  "RetailPct", "FactoryPct",          "StoragePct", "GaragePct",
    "OfficePct",      "OtherPct",       "PopPerBuilding", "FulltimePerBuilding", "MedianAge", "MedianEarnings"};

inline constexpr std::array<std::string_view, 3> kExogenousNames = {"Precipitation", "EventCount", "Holiday"};

struct ZoneCovariates {
    std::string zone_id;
    /// Residential, Commercial, Retail, Factory, Storage, Garage, Office, Other
    /// as proportions of total area.
    std::array<double, 8> land_use{};
    double pop_per_building = 0.0;
    double fulltime_per_building = 0.0;
    /// Raw full-time employment count; carried for reporting, not a main effect.
    double fulltime_emp = 0.0;
    double median_age = 0.0;
    double median_earnings = 0.0;

    /// The 12 main effects in kCovariateNames order.
    Eigen::Matrix<double, 12, 1> main_effects() const;
    /// Throws Error when a land-use share leaves [0,1] or a demographic value is out of range.
    void validate() const;
};

/// Reads "zone_id" plus the kCovariateNames columns (FulltimeEmp optional).
std::vector<ZoneCovariates> parse_covariates(std::istream& source);

/// One zone's temporal residuals; values[k] belongs to panel week first_week + k.
struct ZoneResiduals {
    std::string zone_id;
    int first_week = 0;
    Eigen::VectorXd values;
};

struct DesignTerm {
    std::string name;
    /// Column indices of the two parent main effects for an interaction, else -1.
    int parent_a = -1;
    int parent_b = -1;

    bool is_interaction() const noexcept { return parent_a >= 0; }
};

/// Pooled zone-week design. Column 0 is always the intercept.
struct DesignMatrix {
    std::vector<DesignTerm> terms;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> row_zone;
    std::vector<int> row_week;

    Eigen::Index rows() const noexcept { return X.rows(); }
    Eigen::Index cols() const noexcept { return X.cols(); }
    std::optional<int> column(std::string_view name) const;
};

/// Stacks residuals of every zone into one regression on the zone's static
/// covariates (repeated across weeks). With interactions, all 66 pairwise
/// products of the 12 main effects are appended, named "A:B". When weekly
/// exogenous rows are given, Precipitation/EventCount/Holiday enter as extra
/// main effects without interactions. Throws MissingCovariates.
DesignMatrix build_design(std::span<const ZoneResiduals> residuals, std::span<const ZoneCovariates> covariates,
                          bool include_interactions, const std::vector<WeeklyExog>* exog = nullptr);

struct RegressionFit {
    std::vector<std::string> terms;
    std::vector<int> columns;  ///< design columns retained, ascending
    Eigen::VectorXd coef;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    double sigma2_hat = 0.0;
    double aic = 0.0;
    double adj_r2 = 0.0;
    double f_stat = 0.0;
    Eigen::Index n_obs = 0;
    Eigen::Index df_resid = 0;
    /// Requested columns removed as linearly dependent.
    std::vector<std::string> dropped;
};

/// N log(RSS/N) + 2(K+1) + N log(2 pi) + N.
double gaussian_aic(double rss, Eigen::Index n, Eigen::Index k);

/// OLS on the requested columns (all when empty; must include the intercept)
/// via column-pivoted Householder QR on internally standardized columns.
/// Linearly dependent columns are dropped and listed. Throws Underdetermined
/// when there are not more rows than columns.
RegressionFit ols_fit(const DesignMatrix& dm, std::span<const int> columns = {});

/// Column sets reachable by one marginality-respecting addition or deletion.
std::vector<std::vector<int>> stepwise_moves(const DesignMatrix& dm, const std::vector<int>& current);

/// Bidirectional stepwise AIC search started from the full model.
RegressionFit stepwise_aic(const DesignMatrix& dm);

/// Term, Estimate, Std. Error, T-Statistic, P-Value rows followed by
/// Observations / Adjusted R^2 / Residual Std. Error / F-Stat / AIC rows.
void write_regression_csv(std::ostream& out, const RegressionFit& fit);

}  // namespace stz
