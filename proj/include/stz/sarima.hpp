#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Core>

#include "stz/errors.hpp"

namespace stz {

/// Multiplicative seasonal ARIMA(p,d,q)x(P,D,Q)_s order.
struct SarimaOrder {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 1;

    int arma_terms() const noexcept { return p + q + P + Q; }
    /// ARMA coefficients plus mean and innovation variance.
    int param_count() const noexcept { return arma_terms() + 2; }
    /// Length of the expanded AR polynomial phi(B)Phi(B^s).
    int ar_span() const noexcept { return p + s * P; }
    /// Length of the expanded MA polynomial theta(B)Theta(B^s).
    int ma_span() const noexcept { return q + s * Q; }
    /// Leading observations the conditional likelihood conditions on.
    int conditioning() const noexcept { return ar_span() > ma_span() ? ar_span() : ma_span(); }

    /// Throws Error if any order is out of range or the ARMA term count exceeds cap.
    void validate(int term_cap = 64) const;
    std::string label() const;

    friend bool operator==(const SarimaOrder&, const SarimaOrder&) = default;
};

struct SarimaFit {
    SarimaOrder order;
    Eigen::VectorXd phi, theta, Phi, Theta;
    double mu = 0.0;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    /// One-step prediction errors on the differenced series; the first
    /// `conditioning` entries are the zero-initialized innovations.
    Eigen::VectorXd residuals;
    /// Leading differenced observations the likelihood conditions on.
    int conditioning = 0;
    bool converged = false;
    int iterations = 0;

    /// Packed as [phi, theta, Phi, Theta, mu, sigma2].
    Eigen::VectorXd params() const;
};

/// log(x + 1) elementwise; throws NegativeInput if any x < 0.
Eigen::VectorXd log_transform(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Applies (1-B)^d then (1-B^s)^D. Result has length T - d - s*D.
template <typename Derived>
Eigen::VectorXd difference(const Eigen::MatrixBase<Derived>& x, int d, int D, int s) {
    if (d < 0 || D < 0 || s < 1) throw Error("difference: orders must be nonnegative and s >= 1");
    const Eigen::Index lost = d + static_cast<Eigen::Index>(s) * D;
    if (x.size() <= lost) throw SeriesTooShort("series of length " + std::to_string(x.size()) +
                                               " is too short to difference away " + std::to_string(lost));
    Eigen::VectorXd out = x;
    for (int i = 0; i < d; ++i) {
        const Eigen::Index n = out.size();
        out = (out.tail(n - 1) - out.head(n - 1)).eval();
    }
    for (int i = 0; i < D; ++i) {
        const Eigen::Index n = out.size();
        out = (out.tail(n - s) - out.head(n - s)).eval();
    }
    return out;
}

/// Inverse of difference: rebuilds the level series from its differences and
/// the first d + s*D original values.
Eigen::VectorXd undifference(const Eigen::Ref<const Eigen::VectorXd>& diffs,
                             const Eigen::Ref<const Eigen::VectorXd>& head, int d, int D, int s);

/// Coefficients a_1..a_m of 1 - sum a_k B^k for the products phi(B)Phi(B^s)
/// (ar) and theta(B)Theta(B^s) (ma). Both polynomials use the minus sign
/// convention, so the model reads a(B)(x_t - mu) = b(B) w_t.
struct ExpandedArma {
    Eigen::VectorXd ar;
    Eigen::VectorXd ma;
};

ExpandedArma expand_polynomials(const SarimaOrder& order, const Eigen::Ref<const Eigen::VectorXd>& coeffs);

/// Smallest distance between an inverse root of the expanded AR polynomial
/// and one of the expanded MA polynomial; +inf when either side is empty.
double common_factor_distance(const SarimaOrder& order, const Eigen::Ref<const Eigen::VectorXd>& coeffs);

/// True when every root of 1 - sum c_k z^k lies strictly outside the circle
/// of the given radius.
bool roots_outside(const Eigen::Ref<const Eigen::VectorXd>& coeffs, double radius = 1.0);

/// Conditional-sum-of-squares innovations w_t of the mean-adjusted series,
/// zero over the first max(order.conditioning(), min_conditioning) entries.
/// coeffs holds [phi, theta, Phi, Theta] and is validated for length only.
Eigen::VectorXd css_innovations(const Eigen::Ref<const Eigen::VectorXd>& x_diff, const SarimaOrder& order,
                                const Eigen::Ref<const Eigen::VectorXd>& coeffs, double mu, int min_conditioning = 0);

/// Gaussian CSS log-likelihood. params = [phi, theta, Phi, Theta, mu, sigma2].
/// Throws NonCausalParams / NonInvertibleParams for roots on or inside the
/// unit circle. Terms before max(order.conditioning(), min_conditioning) are
/// conditioned on.
double sarima_loglik(const Eigen::Ref<const Eigen::VectorXd>& x_diff, const SarimaOrder& order,
                     const Eigen::Ref<const Eigen::VectorXd>& params, int min_conditioning = 0);

struct SarimaOptions {
    std::uint64_t seed = 1;
    int restarts = 3;
    int max_iterations = 200;
    /// Polynomial roots closer to the origin than this are rejected during fitting.
    double root_barrier = 1.001;
    /// Condition on at least this many leading differenced values, so fits of
    /// different orders share one likelihood sample.
    int min_conditioning = 0;
    /// auto_order skips fits with any AR or MA root inside this radius; such
    /// near-unit, near-cancelling factors let the conditional likelihood
    /// overfit.
    double selection_root_radius = 1.01;
    /// auto_order also skips fits whose expanded AR and MA polynomials have
    /// inverse roots closer than this: a near-common factor cancels, so a
    /// smaller order describes the same process.
    double common_factor_tol = 0.05;
};

/// Fits the order to the (undifferenced) series by CSS. One descent starts
/// from zero coefficients with mu at the mean of the differenced series and
/// one from the best nested smaller fit with the extra term at zero, so the
/// maximized loglik never falls below that of a nested order. Jittered
/// restarts follow when neither converges.
SarimaFit fit_sarima(const Eigen::Ref<const Eigen::VectorXd>& x, const SarimaOrder& order,
                     const SarimaOptions& opts = {});

struct OrderCaps {
    int p = 3, q = 3, P = 1, Q = 1;
};

/// Grid search over ARMA orders up to the caps with d, D, s fixed; returns
/// the converged fit with minimal AIC. Every candidate conditions on the
/// largest conditioning set in the grid so the AICs share one sample.
/// Fits with roots inside opts.selection_root_radius or with a near-common
/// AR/MA factor (opts.common_factor_tol) are not eligible.
SarimaFit auto_order(const Eigen::Ref<const Eigen::VectorXd>& x, int s, int d, int D, const OrderCaps& caps = {},
                     const SarimaOptions& opts = {});

/// AIC-minimal fit among candidates; ties go to fewer parameters, then to the
/// lexicographically smaller (p, q, P, Q). Unconverged fits are skipped.
/// Throws NoConvergedFit if none qualify.
const SarimaFit& select_best(std::span<const SarimaFit> candidates);

}  // namespace stz
