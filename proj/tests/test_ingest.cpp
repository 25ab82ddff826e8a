#include <doctest.h>

#include <random>
#include <sstream>

#include "stz/calendar.hpp"
#include "stz/csv.hpp"
#include "stz/errors.hpp"
#include "stz/ingest.hpp"

using namespace stz;
using namespace std::chrono;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date{year{y} / m / d}; }

DailySeries series_from(Date first, std::vector<std::optional<double>> counts, std::string id = "z") {
    DailySeries s;
    s.zone_id = std::move(id);
    s.first = first;
    s.counts = std::move(counts);
    return s;
}

}  // namespace

TEST_CASE("calendar dates parse strictly") {
    CHECK(parse_date("2015-01-11") == ymd(2015, 1, 11));
    CHECK_FALSE(parse_date("2015-13-40"));
    CHECK_FALSE(parse_date("2015-02-29"));
    CHECK(parse_date("2016-02-29"));
    CHECK_FALSE(parse_date("2015-1-11"));
    CHECK_FALSE(parse_date("2015-01-11x"));
    CHECK(format_date(ymd(2017, 6, 25)) == "2017-06-25");
    CHECK(parse_weekday("sunday") == Sunday);
    CHECK(weekday_name(Tuesday) == "Tuesday");
    CHECK_THROWS_AS(require_date("nope"), ConfigError);
}

TEST_CASE("csv splitting honours quotes") {
    CHECK(csv::split_line("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(csv::split_line("\"say \"\"hi\"\"\",x") == std::vector<std::string>{"say \"hi\"", "x"});
    CHECK(csv::split_line("a;b", ';') == std::vector<std::string>{"a", "b"});
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("plain") == "plain");
    CHECK(std::stod(csv::format_number(0.1)) == 0.1);
}

TEST_CASE("parse_trips maps fields") {
    std::istringstream in("zone_id,pickup_date,mode,count\n236,2015-01-12,TNC,41\n");
    const auto recs = parse_trips(in);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0] == TripRecord{"236", ymd(2015, 1, 12), Mode::TNC, 41});
}

TEST_CASE("parse_trips rejects a header-only file") {
    std::istringstream in("zone_id,pickup_date,mode,count\n");
    CHECK_THROWS_AS(parse_trips(in), EmptySource);
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_trips(empty), EmptySource);
}

TEST_CASE("parse_trips reports the first bad row") {
    std::istringstream in("zone_id,pickup_date,mode,count\n236,2015-13-40,TNC,41\n");
    try {
        parse_trips(in);
        FAIL("expected MalformedRow");
    } catch (const MalformedRow& e) {
        CHECK(e.row() == 2);
        CHECK(e.reason().find("date") != std::string::npos);
    }
    std::istringstream neg("zone_id,pickup_date,mode,count\n1,2015-01-01,Taxi,2\n1,2015-01-02,Taxi,-3\n");
    CHECK_THROWS_AS(parse_trips(neg), MalformedRow);
}

TEST_CASE("parse_trips event rows and fixed mode") {
    TripSchema schema;
    schema.mode_column = "";
    schema.count_column = "";
    schema.fixed_mode = Mode::Taxi;
    schema.zone_column = "PULocationID";
    std::istringstream in("PULocationID,pickup_date\n7,2015-01-01\n7,2015-01-01\n");
    const auto recs = parse_trips(in, schema);
    REQUIRE(recs.size() == 2);
    CHECK(recs[1].count == 1);
    CHECK(recs[1].mode == Mode::Taxi);
}

TEST_CASE("build_daily sums, zero-fills and marks declared gaps") {
    const DateRange window{ymd(2016, 7, 24), ymd(2016, 7, 30)};
    std::vector<TripRecord> recs = {{"z", ymd(2016, 7, 25), Mode::Taxi, 3},
                                    {"z", ymd(2016, 7, 25), Mode::Taxi, 4},
                                    {"z", ymd(2016, 7, 27), Mode::TNC, 100},
                                    {"z", ymd(2016, 8, 1), Mode::Taxi, 9}};
    GapDeclaration gap;
    gap.zone_id = "z";
    gap.mode = Mode::Taxi;
    gap.ranges = {{ymd(2016, 7, 26), ymd(2016, 7, 26)}};
    const auto daily = build_daily(recs, window, Mode::Taxi, {gap});
    const auto& s = daily.at("z");
    REQUIRE(s.size() == 7);
    CHECK(s.counts[1] == 7.0);
    CHECK_FALSE(s.counts[2].has_value());
    CHECK(s.counts[3] == 0.0);  // TNC record does not count for Taxi
    CHECK(s.counts[0] == 0.0);

    const auto no_gap = build_daily(recs, window, Mode::Taxi);
    CHECK(no_gap.at("z").counts[2] == 0.0);
}

TEST_CASE("impute_local_average uses same-weekday observed values") {
    // Five Tuesdays starting 2015-01-06; the fourth is missing.
    std::vector<std::optional<double>> c(29, 1.0);
    c[0] = 10;
    c[7] = 14;
    c[14] = 18;
    c[21] = std::nullopt;
    c[28] = 14;
    auto s = series_from(ymd(2015, 1, 6), c);
    auto out = impute_local_average(s);
    CHECK(out.counts[21] == doctest::Approx(14.0));
    CHECK_FALSE(out.has_missing());

    // Identity on complete data.
    std::vector<std::optional<double>> full(14, 5.0);
    const auto done = impute_local_average(series_from(ymd(2015, 1, 6), full));
    CHECK(done.counts == full);

    // Every Tuesday missing.
    for (int k = 0; k < 29; k += 7) c[static_cast<std::size_t>(k)] = std::nullopt;
    try {
        impute_local_average(series_from(ymd(2015, 1, 6), c));
        FAIL("expected UnimputableWeekday");
    } catch (const UnimputableWeekday& e) {
        CHECK(e.weekday() == "Tuesday");
    }
}

TEST_CASE("imputation properties on random series") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 50);
    std::bernoulli_distribution miss(0.2);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::optional<double>> c(70);
        for (auto& v : c) v = std::round(u(rng));
        for (std::size_t i = 14; i < c.size(); ++i) {
            if (miss(rng)) c[i] = std::nullopt;
        }
        const auto s = series_from(ymd(2015, 1, 1), c);
        const auto once = impute_local_average(s);
        // Idempotence.
        CHECK(impute_local_average(once).counts == once.counts);
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i]) {
                CHECK(once.counts[i] == c[i]);
                continue;
            }
            // Independent recomputation of the same-weekday mean.
            double sum = 0.0;
            int n = 0;
            for (std::size_t j = i % 7; j < c.size(); j += 7) {
                if (c[j]) {
                    sum += *c[j];
                    ++n;
                }
            }
            CHECK(std::abs(*once.counts[i] - sum / n) < 1e-12);
        }
    }
}

TEST_CASE("filter_low_volume uses a strict mean threshold") {
    DailyMap m;
    m["low"] = series_from(ymd(2015, 1, 1), {4.0, 4.2, 4.4});
    m["edge"] = series_from(ymd(2015, 1, 1), {10.0, 10.0, 10.0});
    m["high"] = series_from(ymd(2015, 1, 1), {100.0, std::nullopt, 50.0});
    const auto f = filter_low_volume(m, 10.0);
    CHECK(f.removed == std::vector<std::string>{"low"});
    CHECK(f.kept.count("edge") == 1);
    REQUIRE(f.kept.count("high") == 1);
    // Retained series are untouched.
    CHECK(f.kept.at("high").counts == m.at("high").counts);
    CHECK(f.kept.at("high").first == m.at("high").first);
    CHECK(filter_low_volume(m, 0.0).kept.size() == 3);
    CHECK_THROWS(filter_low_volume(m, -1.0));
}

TEST_CASE("aggregate_weekly sums counts and summarizes exogenous days") {
    DailyMap m;
    // 2015-01-11 is a Sunday.
    m["z"] = series_from(ymd(2015, 1, 11), {1, 2, 3, 4, 5, 6, 7});
    std::vector<ExogDay> ex;
    for (int k = 0; k < 7; ++k) ex.push_back({ymd(2015, 1, 11) + days{k}, 0.1, 1, k == 3});
    const auto p = aggregate_weekly(m, Mode::TNC, Sunday, ex);
    REQUIRE(p.weeks() == 1);
    CHECK(p.counts(0, 0) == 28.0);
    REQUIRE(p.exog.size() == 1);
    CHECK(p.exog[0].precipitation_in == doctest::Approx(0.1));
    CHECK(p.exog[0].event_count == 7);
    CHECK(p.exog[0].holiday_flag == 1);
}

TEST_CASE("aggregate_weekly trims to the anchor and rejects partial weeks") {
    DailyMap m;
    // Starts on a Thursday: three leading days are dropped.
    std::vector<std::optional<double>> c(3 + 14, 1.0);
    m["z"] = series_from(ymd(2015, 1, 8), c);
    const auto p = aggregate_weekly(m, Mode::TNC);
    CHECK(p.weeks() == 2);
    CHECK(p.week_starts.front() == ymd(2015, 1, 11));
    CHECK(p.exog.size() == 2);

    c.push_back(1.0);
    m["z"] = series_from(ymd(2015, 1, 8), c);
    CHECK_THROWS_AS(aggregate_weekly(m, Mode::TNC), PartialWeek);

    m["z"] = series_from(ymd(2015, 1, 11), {1.0, std::nullopt, 1, 1, 1, 1, 1});
    CHECK_THROWS(aggregate_weekly(m, Mode::TNC));
}

TEST_CASE("weekly aggregation conserves mass over the trimmed window") {
    std::mt19937_64 rng(11);
    std::poisson_distribution<int> pois(40);
    DailyMap m;
    const Date first = ymd(2015, 1, 8);
    const int days_total = 3 + 7 * 20;
    for (const char* id : {"a", "b", "c"}) {
        std::vector<std::optional<double>> c;
        for (int k = 0; k < days_total; ++k) c.push_back(pois(rng));
        m[id] = series_from(first, c, id);
    }
    const auto p = aggregate_weekly(m, Mode::Taxi);
    for (Eigen::Index z = 0; z < p.zones(); ++z) {
        const auto& s = m.at(p.zone_ids[static_cast<std::size_t>(z)]);
        double daily = 0.0;
        for (std::size_t i = 3; i < s.size(); ++i) daily += *s.counts[i];
        CHECK(p.counts.row(z).sum() == daily);
    }
    for (std::size_t w = 1; w < p.week_starts.size(); ++w) {
        CHECK((p.week_starts[w] - p.week_starts[w - 1]).count() == 7);
    }
}

TEST_CASE("parse_exogenous validates rows") {
    std::istringstream ok("date,precipitation_in,event_count,holiday\n2015-01-01,0.25,3,1\n");
    const auto rows = parse_exogenous(ok);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].holiday);
    CHECK(rows[0].event_count == 3);
    std::istringstream bad("date,precipitation_in,event_count,holiday\n2015-01-01,0.25,3,2\n");
    CHECK_THROWS_AS(parse_exogenous(bad), MalformedRow);
}
