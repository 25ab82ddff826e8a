#include "stz/regression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <boost/math/distributions/students_t.hpp>

#include "stz/csv.hpp"
#include "stz/errors.hpp"

namespace stz {

Eigen::Matrix<double, 12, 1> ZoneCovariates::main_effects() const {
    Eigen::Matrix<double, 12, 1> v;
    for (int i = 0; i < 8; ++i) v(i) = land_use[static_cast<std::size_t>(i)];
    v(8) = pop_per_building;
    v(9) = fulltime_per_building;
    v(10) = median_age;
    v(11) = median_earnings;
    return v;
}

void ZoneCovariates::validate() const {
    for (std::size_t i = 0; i < land_use.size(); ++i) {
        if (!(land_use[i] >= 0.0 && land_use[i] <= 1.0)) {
            throw Error("zone '" + zone_id + "': " + std::string(kCovariateNames[i]) + " must lie in [0,1]");
        }
    }
    if (pop_per_building < 0 || fulltime_per_building < 0 || fulltime_emp < 0) {
        throw Error("zone '" + zone_id + "': population and employment values must be nonnegative");
    }
    if (!(median_age > 0) || !(median_earnings > 0)) {
        throw Error("zone '" + zone_id + "': median age and earnings must be positive");
    }
}

std::vector<ZoneCovariates> parse_covariates(std::istream& source) {
    std::string line;
    if (!csv::next_line(source, line)) throw EmptySource();
    const csv::Header header(csv::split_line(line));
    const auto id_col = header.find("zone_id");
    if (!id_col) throw MalformedRow(1, "missing column 'zone_id'");
    std::array<std::size_t, 12> cols{};
    for (std::size_t i = 0; i < kCovariateNames.size(); ++i) {
        const auto c = header.find(kCovariateNames[i]);
        if (!c) throw MalformedRow(1, "missing column '" + std::string(kCovariateNames[i]) + "'");
        cols[i] = *c;
    }
    const auto emp_col = header.find("FulltimeEmp");

    auto number = [](const std::string& text, std::size_t row, std::string_view col) {
        const std::string t = csv::trim(text);
        double v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
            throw MalformedRow(row, "bad value '" + text + "' in " + std::string(col));
        }
        return v;
    };

    std::vector<ZoneCovariates> out;
    std::size_t row = 1;
    while (std::getline(source, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto f = csv::split_line(line);
        if (f.size() != header.size()) throw MalformedRow(row, "wrong field count");
        ZoneCovariates z;
        z.zone_id = csv::trim(f[*id_col]);
        std::array<double, 12> v{};
        for (std::size_t i = 0; i < 12; ++i) v[i] = number(f[cols[i]], row, kCovariateNames[i]);
        std::copy_n(v.begin(), 8, z.land_use.begin());
        z.pop_per_building = v[8];
        z.fulltime_per_building = v[9];
        z.median_age = v[10];
        z.median_earnings = v[11];
        if (emp_col) z.fulltime_emp = number(f[*emp_col], row, "FulltimeEmp");
        z.validate();
        out.push_back(std::move(z));
    }
    if (out.empty()) throw EmptySource();
    return out;
}

std::optional<int> DesignMatrix::column(std::string_view name) const {
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].name == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

DesignMatrix build_design(std::span<const ZoneResiduals> residuals, std::span<const ZoneCovariates> covariates,
                          bool include_interactions, const std::vector<WeeklyExog>* exog) {
    std::map<std::string, const ZoneCovariates*> by_zone;
    for (const auto& c : covariates) by_zone[c.zone_id] = &c;

    DesignMatrix dm;
    dm.terms.push_back({"Intercept"});
    for (auto name : kCovariateNames) dm.terms.push_back({std::string(name)});
    const int n_mains = static_cast<int>(kCovariateNames.size());
    if (exog != nullptr) {
        for (auto name : kExogenousNames) dm.terms.push_back({std::string(name)});
    }
    if (include_interactions) {
        for (int a = 1; a <= n_mains; ++a) {
            for (int b = a + 1; b <= n_mains; ++b) {
                dm.terms.push_back({dm.terms[static_cast<std::size_t>(a)].name + ":" +
                                        dm.terms[static_cast<std::size_t>(b)].name,
                                    a, b});
            }
        }
    }

    Eigen::Index n = 0;
    for (const auto& z : residuals) {
        if (!by_zone.contains(z.zone_id)) throw MissingCovariates(z.zone_id);
        n += z.values.size();
    }
    const auto k = static_cast<Eigen::Index>(dm.terms.size());
    dm.X.resize(n, k);
    dm.y.resize(n);
    dm.row_zone.reserve(static_cast<std::size_t>(n));
    dm.row_week.reserve(static_cast<std::size_t>(n));

    Eigen::Index row = 0;
    for (const auto& z : residuals) {
        const auto mains = by_zone.at(z.zone_id)->main_effects();
        for (Eigen::Index t = 0; t < z.values.size(); ++t, ++row) {
            const int week = z.first_week + static_cast<int>(t);
            dm.y(row) = z.values(t);
            dm.row_zone.push_back(z.zone_id);
            dm.row_week.push_back(week);
            Eigen::Index col = 0;
            dm.X(row, col++) = 1.0;
            for (int i = 0; i < n_mains; ++i) dm.X(row, col++) = mains(i);
            if (exog != nullptr) {
                if (week < 0 || static_cast<std::size_t>(week) >= exog->size()) {
                    throw DimensionMismatch("no exogenous row for week " + std::to_string(week));
                }
                const auto& e = (*exog)[static_cast<std::size_t>(week)];
                dm.X(row, col++) = e.precipitation_in;
                dm.X(row, col++) = static_cast<double>(e.event_count);
                dm.X(row, col++) = e.holiday_flag;
            }
            for (; col < k; ++col) {
                const auto& term = dm.terms[static_cast<std::size_t>(col)];
                dm.X(row, col) = dm.X(row, term.parent_a) * dm.X(row, term.parent_b);
            }
        }
    }
    return dm;
}

double gaussian_aic(double rss, Eigen::Index n, Eigen::Index k) {
    const double nn = static_cast<double>(n);
    const double r = std::max(rss, std::numeric_limits<double>::min());
    return nn * std::log(r / nn) + 2.0 * static_cast<double>(k + 1) + nn * std::log(2.0 * std::numbers::pi) + nn;
}

namespace {

std::vector<int> normalize_columns(const DesignMatrix& dm, std::span<const int> columns) {
    std::vector<int> cols;
    if (columns.empty()) {
        for (int j = 0; j < dm.cols(); ++j) cols.push_back(j);
    } else {
        cols.assign(columns.begin(), columns.end());
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    }
    if (cols.empty() || cols.front() != 0) throw Error("regression columns must include the intercept");
    if (cols.back() >= dm.cols()) throw DimensionMismatch("column index out of range");
    return cols;
}

struct Standardized {
    Eigen::MatrixXd Z;
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
};

// Intercept stays a column of ones; other columns are z-scored. Constant
// columns get scale 0 and are left as zeros.
Standardized standardize(const DesignMatrix& dm, const std::vector<int>& cols) {
    const Eigen::Index n = dm.rows();
    const auto k = static_cast<Eigen::Index>(cols.size());
    Standardized s{Eigen::MatrixXd(n, k), Eigen::VectorXd::Zero(k), Eigen::VectorXd::Ones(k)};
    s.Z.col(0).setOnes();
    for (Eigen::Index j = 1; j < k; ++j) {
        const auto x = dm.X.col(cols[static_cast<std::size_t>(j)]);
        const double m = x.mean();
        const double sd = std::sqrt((x.array() - m).square().mean());
        s.mean(j) = m;
        if (sd > 1e-12 * std::max(1.0, std::abs(m))) {
            s.scale(j) = sd;
            s.Z.col(j) = (x.array() - m) / sd;
        } else {
            s.scale(j) = 0.0;
            s.Z.col(j).setZero();
        }
    }
    return s;
}

}  // namespace

RegressionFit ols_fit(const DesignMatrix& dm, std::span<const int> columns) {
    std::vector<int> cols = normalize_columns(dm, columns);
    const Eigen::Index n = dm.rows();
    if (static_cast<Eigen::Index>(cols.size()) >= n) {
        throw Underdetermined(std::to_string(cols.size()) + " columns need more than " + std::to_string(n) + " rows");
    }
    Standardized st = standardize(dm, cols);

    RegressionFit fit;
    // Rank-revealing pass: drop columns outside the leading pivots.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(st.Z);
    pivoted.setThreshold(1e-10);
    const Eigen::Index rank = pivoted.rank();
    if (rank < static_cast<Eigen::Index>(cols.size())) {
        std::vector<bool> keep(cols.size(), false);
        for (Eigen::Index i = 0; i < rank; ++i) keep[static_cast<std::size_t>(pivoted.colsPermutation().indices()(i))] = true;
        keep[0] = true;
        std::vector<int> kept;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (keep[i]) {
                kept.push_back(cols[i]);
            } else {
                fit.dropped.push_back(dm.terms[static_cast<std::size_t>(cols[i])].name);
            }
        }
        cols = std::move(kept);
        st = standardize(dm, cols);
    }

    const auto k = static_cast<Eigen::Index>(cols.size());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(st.Z);
    const Eigen::VectorXd b = qr.solve(dm.y);
    fit.residuals = dm.y - st.Z * b;
    fit.rss = fit.residuals.squaredNorm();
    fit.n_obs = n;
    fit.df_resid = n - k;
    fit.sigma2_hat = fit.rss / static_cast<double>(fit.df_resid);

    const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rinv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_b = fit.sigma2_hat * rinv * rinv.transpose();

    // Map standardized coefficients back to the original column scale.
    Eigen::MatrixXd back = Eigen::MatrixXd::Zero(k, k);
    back(0, 0) = 1.0;
    for (Eigen::Index j = 1; j < k; ++j) {
        if (st.scale(j) == 0.0) continue;
        back(j, j) = 1.0 / st.scale(j);
        back(0, j) = -st.mean(j) / st.scale(j);
    }
    fit.coef = back * b;
    const Eigen::MatrixXd cov = back * cov_b * back.transpose();
    fit.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.t_stats = fit.coef.cwiseQuotient(fit.std_errors);

    boost::math::students_t tdist(static_cast<double>(fit.df_resid));
    fit.p_values.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double t = std::abs(fit.t_stats(j));
        fit.p_values(j) = std::isfinite(t) ? 2.0 * boost::math::cdf(boost::math::complement(tdist, t))
                                           : (std::isnan(t) ? std::nan("") : 0.0);
    }

    fit.columns = cols;
    for (int c : cols) fit.terms.push_back(dm.terms[static_cast<std::size_t>(c)].name);
    fit.aic = gaussian_aic(fit.rss, n, k);

    const double tss = (dm.y.array() - dm.y.mean()).square().sum();
    fit.adj_r2 = tss > 0 ? 1.0 - (fit.rss / static_cast<double>(fit.df_resid)) / (tss / static_cast<double>(n - 1))
                         : std::nan("");
    fit.f_stat = k > 1 && fit.rss > 0
                     ? ((tss - fit.rss) / static_cast<double>(k - 1)) / fit.sigma2_hat
                     : std::nan("");
    return fit;
}

std::vector<std::vector<int>> stepwise_moves(const DesignMatrix& dm, const std::vector<int>& current) {
    const std::set<int> in(current.begin(), current.end());
    std::vector<std::vector<int>> moves;
    const auto k = static_cast<int>(dm.cols());
    for (int j = 1; j < k; ++j) {
        const auto& term = dm.terms[static_cast<std::size_t>(j)];
        if (in.contains(j)) {
            // A main effect may leave only when no retained interaction uses it.
            bool needed = false;
            for (int c : in) {
                const auto& t = dm.terms[static_cast<std::size_t>(c)];
                if (t.is_interaction() && (t.parent_a == j || t.parent_b == j)) needed = true;
            }
            if (needed) continue;
            std::vector<int> next;
            for (int c : in) {
                if (c != j) next.push_back(c);
            }
            moves.push_back(std::move(next));
        } else {
            if (term.is_interaction() && !(in.contains(term.parent_a) && in.contains(term.parent_b))) continue;
            std::vector<int> next(in.begin(), in.end());
            next.insert(std::upper_bound(next.begin(), next.end(), j), j);
            moves.push_back(std::move(next));
        }
    }
    return moves;
}

namespace {

// AIC of a column subset from the Gram matrix of centered standardized
// columns; the intercept is implicit.
class GramEvaluator {
public:
    explicit GramEvaluator(const DesignMatrix& dm) : n_(dm.rows()) {
        std::vector<int> all;
        for (int j = 0; j < dm.cols(); ++j) all.push_back(j);
        const Standardized st = standardize(dm, all);
        const Eigen::VectorXd yc = dm.y.array() - dm.y.mean();
        gram_ = st.Z.transpose() * st.Z;
        xty_ = st.Z.transpose() * yc;
        yy_ = yc.squaredNorm();
    }

    double aic(const std::vector<int>& cols) const {
        std::vector<int> idx;
        for (int c : cols) {
            if (c != 0) idx.push_back(c);
        }
        const auto m = static_cast<Eigen::Index>(idx.size());
        if (m == 0) return gaussian_aic(yy_, n_, 1);
        Eigen::MatrixXd g(m, m);
        Eigen::VectorXd h(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            h(a) = xty_(idx[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < m; ++b) g(a, b) = gram_(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
        qr.setThreshold(1e-10);
        const Eigen::VectorXd beta = qr.solve(h);
        const double rss = std::max(yy_ - beta.dot(h), 0.0);
        if (n_ <= 1 + qr.rank()) return std::numeric_limits<double>::infinity();
        return gaussian_aic(rss, n_, 1 + qr.rank());
    }

private:
    Eigen::Index n_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd xty_;
    double yy_ = 0.0;
};

std::vector<int> descend(const DesignMatrix& dm, std::vector<int> current,
                         const std::function<double(const std::vector<int>&)>& aic) {
    double best = aic(current);
    for (;;) {
        double cand_best = best;
        std::vector<int> cand;
        for (auto& move : stepwise_moves(dm, current)) {
            const double a = aic(move);
            if (a < cand_best - 1e-10) {
                cand_best = a;
                cand = std::move(move);
            }
        }
        if (cand.empty()) return current;
        current = std::move(cand);
        best = cand_best;
    }
}

}  // namespace

RegressionFit stepwise_aic(const DesignMatrix& dm) {
    std::vector<int> current;
    for (int j = 0; j < dm.cols(); ++j) current.push_back(j);
    if (dm.cols() >= dm.rows()) {
        throw Underdetermined(std::to_string(dm.cols()) + " columns need more than " + std::to_string(dm.rows()) + " rows");
    }

    const GramEvaluator gram(dm);
    current = descend(dm, std::move(current), [&](const std::vector<int>& c) { return gram.aic(c); });
    // Confirm the optimum with the QR path used for reporting.
    current = descend(dm, std::move(current), [&](const std::vector<int>& c) {
        try {
            return ols_fit(dm, c).aic;
        } catch (const Underdetermined&) {
            return std::numeric_limits<double>::infinity();
        }
    });
    return ols_fit(dm, current);
}

void write_regression_csv(std::ostream& out, const RegressionFit& fit) {
    using csv::format_number;
    out << "Term,Estimate,Std. Error,T-Statistic,P-Value\n";
    for (std::size_t i = 0; i < fit.terms.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        out << csv::escape(fit.terms[i]) << ',' << format_number(fit.coef(j)) << ','
            << format_number(fit.std_errors(j)) << ',' << format_number(fit.t_stats(j)) << ','
            << format_number(fit.p_values(j)) << '\n';
    }
    const auto k = static_cast<Eigen::Index>(fit.terms.size());
    out << "Observations," << fit.n_obs << ",,,\n";
    out << "Adjusted R^2," << format_number(fit.adj_r2) << ",,,\n";
    out << "Residual Std. Error," << format_number(std::sqrt(fit.sigma2_hat)) << ",,,\n";
    out << csv::escape("F-Stat (df=" + std::to_string(k - 1) + ";" + std::to_string(fit.df_resid) + ")") << ','
        << format_number(fit.f_stat) << ",,,\n";
    out << "AIC," << format_number(fit.aic) << ",,,\n";
}

}  // namespace stz
