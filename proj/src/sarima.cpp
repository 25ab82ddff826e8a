#include "stz/sarima.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "stz/optimize.hpp"

namespace stz {

void SarimaOrder::validate(int term_cap) const {
    if (p < 0 || q < 0 || P < 0 || Q < 0) throw Error("SARIMA orders must be nonnegative");
    if (d < 0 || d > 2) throw Error("nonseasonal differencing d must be in 0..2");
    if (D < 0 || D > 1) throw Error("seasonal differencing D must be 0 or 1");
    if (s < 1) throw Error("seasonal period must be >= 1");
    if (arma_terms() > term_cap) throw Error("order " + label() + " exceeds the ARMA term cap");
}

std::string SarimaOrder::label() const {
    std::ostringstream os;
    os << '(' << p << ',' << d << ',' << q << ")x(" << P << ',' << D << ',' << Q << ")_" << s;
    return os.str();
}

Eigen::VectorXd SarimaFit::params() const {
    Eigen::VectorXd out(order.param_count());
    out << phi, theta, Phi, Theta, mu, sigma2;
    return out;
}

Eigen::VectorXd log_transform(const Eigen::Ref<const Eigen::VectorXd>& x) {
    if ((x.array() < 0).any()) throw NegativeInput("log_transform requires nonnegative counts");
    return x.array().log1p().matrix();
}

Eigen::VectorXd undifference(const Eigen::Ref<const Eigen::VectorXd>& diffs, const Eigen::Ref<const Eigen::VectorXd>& head,
                             int d, int D, int s) {
    const Eigen::Index lost = d + static_cast<Eigen::Index>(s) * D;
    if (head.size() != lost) throw DimensionMismatch("undifference needs exactly d + s*D initial values");

    // Heads of each intermediate stage, obtained by differencing the original head.
    std::vector<Eigen::VectorXd> heads{head};
    std::vector<Eigen::Index> lags;
    for (int i = 0; i < d; ++i) lags.push_back(1);
    for (int i = 0; i < D; ++i) lags.push_back(s);
    for (Eigen::Index lag : lags) {
        const Eigen::VectorXd& h = heads.back();
        heads.push_back(h.tail(h.size() - lag) - h.head(h.size() - lag));
    }

    Eigen::VectorXd cur = diffs;
    for (std::size_t stage = lags.size(); stage-- > 0;) {
        const Eigen::Index lag = lags[stage];
        const Eigen::VectorXd& h = heads[stage];
        Eigen::VectorXd prev(cur.size() + lag);
        prev.head(h.size()) = h;
        for (Eigen::Index t = h.size(); t < prev.size(); ++t) prev(t) = cur(t - lag) + prev(t - lag);
        cur = std::move(prev);
    }
    return cur;
}

namespace {

// Coefficients of 1 - sum c_k B^k as a full polynomial [1, -c_1, ...].
Eigen::VectorXd to_poly(const Eigen::Ref<const Eigen::VectorXd>& c, int stride) {
    Eigen::VectorXd poly = Eigen::VectorXd::Zero(c.size() * stride + 1);
    poly(0) = 1.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) poly((k + 1) * stride) = -c(k);
    return poly;
}

Eigen::VectorXd poly_mul(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i, b.size()) += a(i) * b;
    return out;
}

void check_length(const SarimaOrder& order, Eigen::Index n) {
    if (n != order.arma_terms()) {
        throw DimensionMismatch("expected " + std::to_string(order.arma_terms()) + " ARMA coefficients, got " +
                                std::to_string(n));
    }
}

bool stationary_factors(const SarimaOrder& o, const Eigen::Ref<const Eigen::VectorXd>& c, double radius, bool ar) {
    const Eigen::Index off_seasonal = o.p + o.q;
    if (ar) {
        return roots_outside(c.segment(0, o.p), radius) &&
               roots_outside(c.segment(off_seasonal, o.P), std::pow(radius, o.s));
    }
    return roots_outside(c.segment(o.p, o.q), radius) &&
           roots_outside(c.segment(off_seasonal + o.P, o.Q), std::pow(radius, o.s));
}

}  // namespace

ExpandedArma expand_polynomials(const SarimaOrder& order, const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
    check_length(order, coeffs.size());
    const Eigen::VectorXd phi = coeffs.segment(0, order.p);
    const Eigen::VectorXd theta = coeffs.segment(order.p, order.q);
    const Eigen::VectorXd Phi = coeffs.segment(order.p + order.q, order.P);
    const Eigen::VectorXd Theta = coeffs.segment(order.p + order.q + order.P, order.Q);

    ExpandedArma out;
    const Eigen::VectorXd ar = poly_mul(to_poly(phi, 1), to_poly(Phi, order.s));
    const Eigen::VectorXd ma = poly_mul(to_poly(theta, 1), to_poly(Theta, order.s));
    out.ar = -ar.tail(ar.size() - 1);
    out.ma = -ma.tail(ma.size() - 1);
    return out;
}

bool roots_outside(const Eigen::Ref<const Eigen::VectorXd>& coeffs, double radius) {
    const Eigen::Index m = coeffs.size();
    if (m == 0) return true;
    if (!coeffs.allFinite()) return false;
    // Reciprocal roots are the eigenvalues of the companion matrix.
    const double limit = 1.0 / radius;
    if (m == 1) return std::abs(coeffs(0)) < limit;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    companion.row(0) = coeffs.transpose();
    companion.bottomLeftCorner(m - 1, m - 1).setIdentity();
    const Eigen::VectorXcd eig = companion.eigenvalues();
    return (eig.array().abs() < limit).all();
}

namespace {

/// Inverse roots of 1 - sum c_k z^k: eigenvalues of the companion matrix.
Eigen::VectorXcd inverse_roots(const Eigen::VectorXd& coeffs) {
    const Eigen::Index m = coeffs.size();
    if (m == 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    companion.row(0) = coeffs.transpose();
    companion.bottomLeftCorner(m - 1, m - 1).setIdentity();
    return companion.eigenvalues();
}

}  // namespace

double common_factor_distance(const SarimaOrder& order, const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
    const ExpandedArma poly = expand_polynomials(order, coeffs);
    const Eigen::VectorXcd ar = inverse_roots(poly.ar);
    const Eigen::VectorXcd ma = inverse_roots(poly.ma);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : ar) {
        for (const auto& b : ma) best = std::min(best, std::abs(a - b));
    }
    return best;
}

Eigen::VectorXd css_innovations(const Eigen::Ref<const Eigen::VectorXd>& x_diff, const SarimaOrder& order,
                                const Eigen::Ref<const Eigen::VectorXd>& coeffs, double mu, int min_conditioning) {
    const ExpandedArma poly = expand_polynomials(order, coeffs);
    const Eigen::Index n = x_diff.size();
    const Eigen::Index start = std::min<Eigen::Index>(std::max(order.conditioning(), min_conditioning), n);
    const Eigen::VectorXd centered = x_diff.array() - mu;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index t = start; t < n; ++t) {
        double v = centered(t);
        for (Eigen::Index k = 0; k < poly.ar.size(); ++k) v -= poly.ar(k) * centered(t - k - 1);
        for (Eigen::Index k = 0; k < poly.ma.size(); ++k) v += poly.ma(k) * w(t - k - 1);
        w(t) = v;
    }
    return w;
}

double sarima_loglik(const Eigen::Ref<const Eigen::VectorXd>& x_diff, const SarimaOrder& order,
                     const Eigen::Ref<const Eigen::VectorXd>& params, int min_conditioning) {
    if (params.size() != order.param_count()) {
        throw DimensionMismatch("expected " + std::to_string(order.param_count()) + " parameters");
    }
    const Eigen::VectorXd coeffs = params.head(order.arma_terms());
    const double mu = params(order.arma_terms());
    const double sigma2 = params(order.arma_terms() + 1);
    if (!(sigma2 > 0)) throw Error("innovation variance must be positive");
    if (!stationary_factors(order, coeffs, 1.0, true)) throw NonCausalParams();
    if (!stationary_factors(order, coeffs, 1.0, false)) throw NonInvertibleParams();
    const int cond = std::max(order.conditioning(), min_conditioning);
    if (x_diff.size() <= cond) throw SeriesTooShort("no observations beyond the conditioning set");

    const Eigen::VectorXd w = css_innovations(x_diff, order, coeffs, mu, cond);
    const Eigen::Index n_eff = x_diff.size() - cond;
    const double ss = w.tail(n_eff).squaredNorm();
    return -0.5 * static_cast<double>(n_eff) * std::log(2.0 * std::numbers::pi * sigma2) - ss / (2.0 * sigma2);
}

namespace {

using FitMemo = std::map<std::array<int, 4>, std::optional<SarimaFit>>;

std::array<int, 4> arma_key(const SarimaOrder& o) { return {o.p, o.q, o.P, o.Q}; }

/// The fit's [coeffs, mu] embedded in `order`, which has one more term in
/// the factor at `slot` (0..3 for p, q, P, Q); the new coefficient is zero.
Eigen::VectorXd embed(const SarimaFit& fit, int slot) {
    const std::array<const Eigen::VectorXd*, 4> parts{&fit.phi, &fit.theta, &fit.Phi, &fit.Theta};
    Eigen::VectorXd out(fit.order.arma_terms() + 2);
    Eigen::Index at = 0;
    for (int j = 0; j < 4; ++j) {
        out.segment(at, parts[j]->size()) = *parts[j];
        at += parts[j]->size();
        if (j == slot) out(at++) = 0.0;
    }
    out(at) = fit.mu;
    return out;
}

SarimaFit fit_with_starts(const Eigen::VectorXd& xd, const SarimaOrder& order, const SarimaOptions& opts,
                          const std::vector<Eigen::VectorXd>& warm) {
    const Eigen::Index n = xd.size();
    const int start = std::max(order.conditioning(), opts.min_conditioning);
    if (n <= order.param_count() || n <= start) {
        throw SeriesTooShort("differenced length " + std::to_string(n) + " does not exceed the " +
                             std::to_string(order.param_count()) + " parameters of " + order.label());
    }
    if (!xd.allFinite()) throw OptimizerFailure("series contains non-finite values");
    const Eigen::Index n_eff = n - start;
    const int k = order.arma_terms();

    const optim::ResidualFn residuals = [&](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
        const auto c = v.head(k);
        if (!stationary_factors(order, c, opts.root_barrier, true) ||
            !stationary_factors(order, c, opts.root_barrier, false)) {
            return false;
        }
        r = css_innovations(xd, order, c, v(k), start).tail(n_eff);
        return r.allFinite();
    };
    const auto objective = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd r;
        return residuals(v, r) ? r.squaredNorm() : std::numeric_limits<double>::infinity();
    };

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(k + 1);
    x0(k) = xd.mean();
    optim::LmOptions lm;
    lm.max_iterations = opts.max_iterations;

    optim::Result best;
    best.value = std::numeric_limits<double>::infinity();
    bool have = false;
    const auto consider = [&](const Eigen::VectorXd& from) {
        optim::Result res = optim::levenberg_marquardt(residuals, from, lm);
        if (!std::isfinite(res.value)) return;
        if (!have || res.value < best.value) {
            best = res;
            have = true;
        }
    };

    consider(x0);
    // Descending from the best embedded smaller fit keeps the larger model
    // at least as good as every model it nests.
    const Eigen::VectorXd* best_warm = nullptr;
    double best_warm_value = std::numeric_limits<double>::infinity();
    for (const auto& w : warm) {
        const double v = objective(w);
        if (v < best_warm_value) {
            best_warm_value = v;
            best_warm = &w;
        }
    }
    if (best_warm != nullptr) consider(*best_warm);

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    const double scale = std::sqrt(std::max((xd.array() - xd.mean()).square().mean(), 1e-300));
    for (int attempt = 0; attempt < opts.restarts && !(have && best.converged); ++attempt) {
        Eigen::VectorXd start_x = x0;
        for (int j = 0; j < k; ++j) start_x(j) = jitter(rng);
        start_x(k) += scale * jitter(rng);
        if (!std::isfinite(objective(start_x))) start_x.head(k).setZero();
        consider(start_x);
    }
    if (!have) throw OptimizerFailure("objective not finite at any start for " + order.label());

    SarimaFit fit;
    fit.order = order;
    fit.converged = best.converged;
    fit.iterations = best.iterations;
    const Eigen::VectorXd& v = best.x;
    fit.phi = v.segment(0, order.p);
    fit.theta = v.segment(order.p, order.q);
    fit.Phi = v.segment(order.p + order.q, order.P);
    fit.Theta = v.segment(order.p + order.q + order.P, order.Q);
    fit.mu = v(k);
    fit.conditioning = start;
    fit.residuals = css_innovations(xd, order, v.head(k), fit.mu, start);
    const double ss = fit.residuals.tail(n_eff).squaredNorm();
    fit.sigma2 = std::max(ss / static_cast<double>(n_eff), std::numeric_limits<double>::min());
    fit.loglik = sarima_loglik(xd, order, fit.params(), start);
    fit.aic = -2.0 * fit.loglik + 2.0 * order.param_count();
    return fit;
}

/// Fits `order` after its nested predecessors (one fewer term in any
/// factor), memoized, so each fit can start from the embedded smaller fits.
const std::optional<SarimaFit>& fit_nested(const Eigen::VectorXd& xd, const SarimaOrder& order,
                                           const SarimaOptions& opts, FitMemo& memo) {
    const auto key = arma_key(order);
    if (const auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<Eigen::VectorXd> warm;
    for (int slot = 0; slot < 4; ++slot) {
        SarimaOrder smaller = order;
        int* field = std::array<int*, 4>{&smaller.p, &smaller.q, &smaller.P, &smaller.Q}[static_cast<std::size_t>(slot)];
        if (*field == 0) continue;
        --*field;
        if (const auto& f = fit_nested(xd, smaller, opts, memo)) warm.push_back(embed(*f, slot));
    }
    std::optional<SarimaFit> fit;
    try {
        fit = fit_with_starts(xd, order, opts, warm);
    } catch (const SeriesTooShort&) {
    } catch (const OptimizerFailure&) {
    }
    return memo[key] = std::move(fit);
}

}  // namespace

SarimaFit fit_sarima(const Eigen::Ref<const Eigen::VectorXd>& x, const SarimaOrder& order, const SarimaOptions& opts) {
    order.validate();
    const Eigen::VectorXd xd = difference(x, order.d, order.D, order.s);
    FitMemo memo;
    // Predecessors failing is not fatal; the requested order reports its own error.
    std::vector<Eigen::VectorXd> warm;
    for (int slot = 0; slot < 4; ++slot) {
        SarimaOrder smaller = order;
        int* field = std::array<int*, 4>{&smaller.p, &smaller.q, &smaller.P, &smaller.Q}[static_cast<std::size_t>(slot)];
        if (*field == 0) continue;
        --*field;
        if (const auto& f = fit_nested(xd, smaller, opts, memo)) warm.push_back(embed(*f, slot));
    }
    return fit_with_starts(xd, order, opts, warm);
}

const SarimaFit& select_best(std::span<const SarimaFit> candidates) {
    const SarimaFit* best = nullptr;
    auto key = [](const SarimaFit& f) {
        return std::array<int, 5>{f.order.param_count(), f.order.p, f.order.q, f.order.P, f.order.Q};
    };
    for (const auto& f : candidates) {
        if (!f.converged || !std::isfinite(f.aic)) continue;
        if (best == nullptr) {
            best = &f;
            continue;
        }
        const double tol = 1e-9 * std::max(1.0, std::abs(best->aic));
        if (f.aic < best->aic - tol || (std::abs(f.aic - best->aic) <= tol && key(f) < key(*best))) best = &f;
    }
    if (best == nullptr) throw NoConvergedFit("no candidate order produced a converged fit");
    return *best;
}

SarimaFit auto_order(const Eigen::Ref<const Eigen::VectorXd>& x, int s, int d, int D, const OrderCaps& caps,
                     const SarimaOptions& opts) {
    const SarimaOrder largest{caps.p, d, caps.q, caps.P, D, caps.Q, s};
    largest.validate();
    SarimaOptions shared = opts;
    shared.min_conditioning = std::max(opts.min_conditioning, largest.conditioning());
    const Eigen::VectorXd xd = difference(x, d, D, s);
    FitMemo memo;
    std::vector<SarimaFit> fits;
    for (int p = 0; p <= caps.p; ++p) {
        for (int q = 0; q <= caps.q; ++q) {
            for (int P = 0; P <= caps.P; ++P) {
                for (int Q = 0; Q <= caps.Q; ++Q) {
                    const SarimaOrder order{p, d, q, P, D, Q, s};
                    const auto& fit = fit_nested(xd, order, shared, memo);
                    if (!fit) continue;
                    const Eigen::VectorXd c = fit->params().head(order.arma_terms());
                    if (stationary_factors(order, c, opts.selection_root_radius, true) &&
                        stationary_factors(order, c, opts.selection_root_radius, false) &&
                        common_factor_distance(order, c) >= opts.common_factor_tol) {
                        fits.push_back(*fit);
                    }
                }
            }
        }
    }
    return select_best(fits);
}

}  // namespace stz
