#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stz/diagnostics.hpp"
#include "stz/errors.hpp"
#include "stz/simulate.hpp"

using namespace stz;

TEST_CASE("acf matches the direct formula") {
    sim::Rng rng(1);
    const auto x = sim::gaussian(200, rng);
    const auto r = acf(x, 10);
    REQUIRE(r.size() == 10);
    for (int k = 1; k <= 10; ++k) CHECK(std::abs(r(k - 1) - oracle::acf(x, k)) < 1e-14);
}

TEST_CASE("acf of iid draws stays within the sampling band") {
    int inside = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        sim::Rng rng(seed);
        const auto x = sim::gaussian(1000, rng);
        const auto r = acf(x, 20);
        for (Eigen::Index k = 0; k < r.size(); ++k, ++total) inside += std::abs(r(k)) < 3.0 / std::sqrt(1000.0);
    }
    CHECK(inside >= 0.9 * total);
}

TEST_CASE("acf of an alternating series") {
    Eigen::VectorXd x(100);
    for (int t = 0; t < 100; ++t) x(t) = t % 2 == 0 ? 1.0 : -1.0;
    CHECK(acf(x, 1)(0) == doctest::Approx(-99.0 / 100.0).epsilon(1e-15));
    CHECK_THROWS_AS(acf(Eigen::VectorXd::Constant(20, 2.0), 3), ConstantSeries);
}

TEST_CASE("ljung_box examples") {
    // Only the pair (first, last) is nonzero, so every autocorrelation below
    // lag n - 1 vanishes exactly.
    Eigen::VectorXd spikes = Eigen::VectorXd::Zero(40);
    spikes(0) = 1.0;
    spikes(39) = -1.0;
    const auto zero = ljung_box(spikes, 12);
    CHECK(zero.statistic == 0.0);
    CHECK(zero.p_value == 1.0);

    Eigen::VectorXd alt(100);
    for (int t = 0; t < 100; ++t) alt(t) = t % 2 == 0 ? 1.0 : -1.0;
    const auto res = ljung_box(alt, 12);
    CHECK(res.p_value < 1e-6);
    CHECK(res.statistic == doctest::Approx(oracle::ljung_box_q(alt, 12)).epsilon(1e-12));
    CHECK(res.df == 12);
    CHECK(res.test == PortmanteauTest::LjungBox);
    CHECK(ljung_box(alt, 12, 2).df == 10);
    CHECK_THROWS(ljung_box(alt, 100));
    CHECK_THROWS(ljung_box(alt, 0));
}

TEST_CASE("p-values are upper chi-square tails") {
    CHECK(chi_square_sf(0.0, 12) == 1.0);
    CHECK(chi_square_sf(21.026069817483066, 12) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(normal_sf(1.6448536269514722) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(normal_sf(0.0) == 0.5);
}

TEST_CASE("mcleod_li examples") {
    Eigen::VectorXd flat(60);
    for (int t = 0; t < 60; ++t) flat(t) = t % 3 == 0 ? 2.0 : -2.0;
    CHECK_THROWS_AS(mcleod_li(flat, 12), ConstantSeries);

    int rejected = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        sim::Rng rng(seed);
        const auto path = sim::garch(0.1, Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, 0.6), 1000, rng);
        rejected += mcleod_li(path.r, 12).p_value < 0.05;
    }
    CHECK(rejected >= 19);
}

TEST_CASE("portmanteau properties") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        sim::Rng rng(seed);
        const auto x = sim::gaussian(128, rng);

        double prev = -1.0;
        for (int lag = 1; lag <= 20; ++lag) {
            const auto r = ljung_box(x, lag);
            CHECK(r.statistic >= prev);
            CHECK(r.statistic >= 0.0);
            CHECK(r.p_value >= 0.0);
            CHECK(r.p_value <= 1.0);
            prev = r.statistic;
        }

        const Eigen::VectorXd sq = x.array().square();
        const Eigen::VectorXd centered = (sq.array() - sq.mean()).matrix();
        const auto ml = mcleod_li(x, 12);
        const auto lb = ljung_box(centered, 12);
        CHECK(ml.statistic == doctest::Approx(lb.statistic).epsilon(1e-12));
        CHECK(ml.p_value == doctest::Approx(lb.p_value).epsilon(1e-12));
        CHECK(ml.test == PortmanteauTest::McLeodLi);

        const auto base = ljung_box(x, 12);
        for (auto [a, b] : {std::pair{5.0, 2.0}, {-3.0, -0.25}, {1e3, 7.5}}) {
            const Eigen::VectorXd y = (a + b * x.array()).matrix();
            const auto t = ljung_box(y, 12);
            CHECK(std::abs(t.statistic - base.statistic) < 1e-10);
            CHECK(std::abs(t.p_value - base.p_value) < 1e-10);
        }
    }
}
