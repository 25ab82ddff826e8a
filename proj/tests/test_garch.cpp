#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stz/errors.hpp"
#include "stz/garch.hpp"
#include "stz/simulate.hpp"

using namespace stz;

namespace {

GarchParams params(double a0, double a1, double b1) {
    GarchParams p;
    p.alpha0 = a0;
    p.alpha = Eigen::VectorXd::Constant(1, a1);
    p.beta = Eigen::VectorXd::Constant(1, b1);
    return p;
}

// Second implementation of the GARCH(1,1) likelihood.
double loglik_oracle(const Eigen::VectorXd& r, double a0, double a1, double b1) {
    const double n = static_cast<double>(r.size());
    double mean = 0.0;
    for (Eigen::Index t = 0; t < r.size(); ++t) mean += r(t) / n;
    double v0 = 0.0;
    for (Eigen::Index t = 0; t < r.size(); ++t) v0 += (r(t) - mean) * (r(t) - mean) / n;
    double ll = 0.0, prev_s2 = v0;
    for (Eigen::Index t = 0; t < r.size(); ++t) {
        const double s2 = t == 0 ? v0 : a0 + a1 * r(t - 1) * r(t - 1) + b1 * prev_s2;
        ll += -0.5 * std::log(2.0 * std::numbers::pi * s2) - r(t) * r(t) / (2.0 * s2);
        prev_s2 = s2;
    }
    return ll;
}

}  // namespace

TEST_CASE("garch_filter examples") {
    sim::Rng rng(1);
    const auto r = sim::gaussian(20, rng);
    GarchParams flat;
    flat.alpha0 = 0.5;
    flat.alpha = Eigen::VectorXd::Zero(1);
    flat.beta = Eigen::VectorXd::Zero(1);
    const auto s2 = garch_filter(r, flat);
    CHECK((s2.tail(19).array() == 0.5).all());

    Eigen::VectorXd spike = Eigen::VectorXd::Zero(10);
    spike(0) = 1.0;
    const auto v = garch_filter(spike, params(0.1, 0.2, 0.3));
    const double v0 = (spike.array() - spike.mean()).square().mean();
    CHECK(v(0) == doctest::Approx(v0).epsilon(1e-15));
    CHECK(v(1) == doctest::Approx(0.1 + 0.2 * 1.0 + 0.3 * v0).epsilon(1e-15));

    CHECK_THROWS_AS(garch_filter(r, params(0.1, 0.5, 0.5)), ConstraintViolation);
    CHECK_THROWS_AS(garch_filter(r, params(0.0, 0.1, 0.1)), ConstraintViolation);
    CHECK_THROWS_AS(garch_filter(r, params(0.1, -0.1, 0.1)), ConstraintViolation);
}

TEST_CASE("zero-variance input falls back to the unconditional variance") {
    const auto v = garch_filter(Eigen::VectorXd::Zero(5), params(0.1, 0.2, 0.3));
    CHECK(v(0) == doctest::Approx(0.1 / 0.5));
    CHECK((v.array() > 0).all());
}

TEST_CASE("garch_loglik examples") {
    sim::Rng rng(2);
    const auto r = sim::gaussian(50, rng, 1.3);
    GarchParams flat = params(0.7, 0.0, 0.0);
    double iid = 0.0;
    for (Eigen::Index t = 1; t < r.size(); ++t) {
        iid += -0.5 * std::log(2.0 * std::numbers::pi * 0.7) - r(t) * r(t) / 1.4;
    }
    const double v0 = (r.array() - r.mean()).square().mean();
    iid += -0.5 * std::log(2.0 * std::numbers::pi * v0) - r(0) * r(0) / (2.0 * v0);
    CHECK(garch_loglik(r, flat) == doctest::Approx(iid).epsilon(1e-12));

    const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(12);
    const auto p = params(0.2, 0.1, 0.6);
    const auto s2 = garch_filter(zeros, p);
    double expected = 0.0;
    for (Eigen::Index t = 0; t < 12; ++t) expected += -0.5 * std::log(2.0 * std::numbers::pi * s2(t));
    CHECK(garch_loglik(zeros, p) == doctest::Approx(expected).epsilon(1e-12));

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        sim::Rng g(seed);
        const auto x = sim::gaussian(50, g, 0.8);
        CHECK(std::abs(garch_loglik(x, params(0.1, 0.15, 0.7)) - loglik_oracle(x, 0.1, 0.15, 0.7)) < 1e-10);
    }
}

TEST_CASE("fit_garch examples") {
    SUBCASE("too short") { CHECK_THROWS_AS(fit_garch(Eigen::VectorXd::Ones(10)), SeriesTooShort); }
    SUBCASE("iid input has little persistence and unit-variance standardized residuals") {
        sim::Rng rng(9);
        const auto r = sim::gaussian(1000, rng);
        const auto fit = fit_garch(r);
        CHECK(fit.params.alpha(0) < 0.1);
        const auto& e = fit.std_resid;
        const double var = (e.array() - e.mean()).square().mean();
        CHECK(var > 0.9);
        CHECK(var < 1.1);
    }
    SUBCASE("simulated GARCH(1,1) recovery") {
        sim::Rng rng(4);
        const auto path = sim::garch(0.1, Eigen::VectorXd::Constant(1, 0.1), Eigen::VectorXd::Constant(1, 0.8), 5000, rng);
        const auto fit = fit_garch(path.r);
        CHECK(std::abs(fit.params.alpha0 - 0.1) < 0.05);
        CHECK(std::abs(fit.params.alpha(0) - 0.1) < 0.05);
        CHECK(std::abs(fit.params.beta(0) - 0.8) < 0.05);
    }
}

TEST_CASE("fit invariants") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        sim::Rng rng(seed);
        const auto path = sim::garch(0.05, Eigen::VectorXd::Constant(1, 0.2), Eigen::VectorXd::Constant(1, 0.6), 800, rng);
        const auto fit = fit_garch(path.r, {}, {.seed = seed});
        const auto& p = fit.params;
        CHECK(p.alpha0 > 0);
        CHECK(p.alpha(0) >= 0);
        CHECK(p.beta(0) >= 0);
        CHECK(p.persistence() < 1.0);
        CHECK((fit.cond_var.array() > 0).all());
        CHECK(fit.loglik >= fit.initial_loglik);
        CHECK(fit.loglik == doctest::Approx(garch_loglik(path.r, p)).epsilon(1e-12));
        const Eigen::VectorXd rebuilt = fit.std_resid.array() * fit.cond_var.array().sqrt();
        CHECK((rebuilt - path.r).cwiseAbs().maxCoeff() < 1e-12);

        const double c = 3.7;
        const auto scaled = fit_garch((c * path.r).eval(), {}, {.seed = seed});
        CHECK(std::abs(scaled.params.alpha0 / (c * c) - p.alpha0) < 1e-4);
        CHECK(std::abs(scaled.params.alpha(0) - p.alpha(0)) < 1e-4);
        CHECK(std::abs(scaled.params.beta(0) - p.beta(0)) < 1e-4);
        CHECK((scaled.std_resid - fit.std_resid).cwiseAbs().maxCoeff() < 1e-4);
    }
}

TEST_CASE("higher-order fits keep the constraints") {
    sim::Rng rng(21);
    const auto path = sim::garch(0.05, Eigen::VectorXd::Constant(1, 0.15), Eigen::VectorXd::Constant(1, 0.7), 1500, rng);
    const auto fit = fit_garch(path.r, {2, 2});
    CHECK(fit.params.alpha.size() == 2);
    CHECK(fit.params.beta.size() == 2);
    CHECK((fit.params.alpha.array() >= 0).all());
    CHECK((fit.params.beta.array() >= 0).all());
    CHECK(fit.params.persistence() < 1.0);
    CHECK_THROWS(fit_garch(path.r, {0, 1}));
}
