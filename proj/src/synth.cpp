#include "stz/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include <json.hpp>

#include "stz/csv.hpp"
#include "stz/errors.hpp"
#include "stz/geometry.hpp"
#include "stz/regression.hpp"

namespace stz {

namespace {

using json = nlohmann::json;
using Rng = std::mt19937_64;

struct ZoneDynamics {
    double daily_base = 0.0;
    double drift = 0.0;
    double ar = 0.0;
    double ma = 0.0;
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double in_mean = 0.0;  ///< signed; zero outside the planted blocks
};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Weekly log-level increments (without drift) of one zone.
std::vector<double> increments(const ZoneDynamics& z, int weeks, Rng& rng) {
    std::normal_distribution<double> normal;
    const double uncond = z.omega / (1.0 - z.alpha - z.beta);
    const double threshold = std::sqrt(uncond);
    const int burn = 200;
    double prev_e = 0.0, prev_eps = 0.0, prev_s2 = uncond, prev_x = 0.0;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(weeks));
    for (int t = 0; t < weeks + burn; ++t) {
        // The variance recursion sees only the zero-mean part of the shock, so
        // the in-mean term is not linearly correlated with the previous shock.
        const double s2 = z.omega + z.alpha * prev_eps * prev_eps + z.beta * prev_s2;
        const double s = std::sqrt(s2);
        const double m = z.in_mean == 0.0 ? 0.0 : (s < threshold ? z.in_mean : -z.in_mean);
        const double eps = s * normal(rng);
        const double e = s * m + eps;
        const double x = z.ar * prev_x + e - z.ma * prev_e;
        prev_e = e;
        prev_eps = eps;
        prev_s2 = s2;
        prev_x = x;
        if (t >= burn) out.push_back(x);
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << body;
}

bool is_holiday(Date d) {
    const std::chrono::year_month_day ymd{d};
    const unsigned m = static_cast<unsigned>(ymd.month());
    const unsigned day = static_cast<unsigned>(ymd.day());
    return (m == 1 && day == 1) || (m == 7 && day == 4) || (m == 12 && day == 25);
}

}  // namespace

SynthManifest write_synthetic_dataset(const std::filesystem::path& dir, const SynthOptions& opts) {
    if (opts.rows < 1 || opts.cols < 1 || opts.weeks < 8) throw ConfigError("synthetic lattice is too small");
    const int n = opts.rows * opts.cols;
    for (const auto* block : {&opts.high_block, &opts.low_block}) {
        for (int i : *block) {
            if (i < 0 || i >= n) throw ConfigError("planted block index out of range");
        }
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

    SynthManifest man;
    for (int i = 0; i < n; ++i) man.zone_ids.push_back(std::to_string(101 + i));
    for (int i : opts.high_block) man.high_block.push_back(man.zone_ids[static_cast<std::size_t>(i)]);
    for (int i : opts.low_block) man.low_block.push_back(man.zone_ids[static_cast<std::size_t>(i)]);
    man.low_volume_zone = "199";
    // First zone from the middle of the top row that is in neither block.
    for (int i = std::max(0, opts.cols / 2 - 1); i < n && man.gap_zone.empty(); ++i) {
        const bool planted = std::count(opts.high_block.begin(), opts.high_block.end(), i) +
                             std::count(opts.low_block.begin(), opts.low_block.end(), i);
        if (!planted) man.gap_zone = man.zone_ids[static_cast<std::size_t>(i)];
    }
    if (man.gap_zone.empty()) man.gap_zone = man.zone_ids.front();

    Rng rng(opts.seed);
    const Date first_sunday = opts.first_day + (std::chrono::Sunday - std::chrono::weekday{opts.first_day});
    const Date last_day = first_sunday + std::chrono::days{opts.weeks * 7 - 1};
    const int n_days = static_cast<int>((last_day - opts.first_day).count()) + 1;
    const int lead = static_cast<int>((first_sunday - opts.first_day).count());

    // Sunday .. Saturday demand profile.
    const std::array<double, 7> profile = {0.86, 0.88, 0.94, 0.98, 1.06, 1.2, 1.08};

    struct Series {
        std::vector<double> level;  // weekly log level
    };
    std::map<std::pair<int, int>, Series> levels;  // (zone, mode) -> level path
    for (int mode = 0; mode < 2; ++mode) {
        for (int i = 0; i < n; ++i) {
            ZoneDynamics z;
            z.daily_base = mode == 0 ? uniform(rng, 1500, 2500) : uniform(rng, 2500, 4000);
            z.drift = mode == 0 ? uniform(rng, 0.001, 0.003) : uniform(rng, -0.002, 0.0);
            if (i % 2 == 0) {
                z.ma = uniform(rng, 0.2, 0.5);
            } else {
                z.ar = uniform(rng, 0.2, 0.5);
            }
            const double sd = 0.04;
            const bool high = std::find(opts.high_block.begin(), opts.high_block.end(), i) != opts.high_block.end();
            const bool low = std::find(opts.low_block.begin(), opts.low_block.end(), i) != opts.low_block.end();
            if (high || low) {
                z.alpha = opts.arch_alpha;
                z.beta = 0.0;
                z.in_mean = high ? opts.in_mean : -opts.in_mean;
            } else {
                z.alpha = uniform(rng, 0.03, 0.1);
                z.beta = uniform(rng, 0.3, 0.6);
            }
            z.omega = sd * sd * (1.0 - z.alpha - z.beta);
            const auto x = increments(z, opts.weeks, rng);
            Series s;
            double level = std::log(7.0 * z.daily_base);
            for (int t = 0; t < opts.weeks; ++t) {
                level += z.drift + x[static_cast<std::size_t>(t)];
                s.level.push_back(level);
            }
            levels[{i, mode}] = std::move(s);
        }
    }

    const Date gap_first = Date{std::chrono::year{2016} / 3 / 1};
    const Date gap_last = Date{std::chrono::year{2016} / 3 / 3};
    std::string trips = "zone_id,pickup_date,mode,count\n";
    std::string exog = "date,precipitation_in,event_count,holiday\n";
    for (int d = 0; d < n_days; ++d) {
        const Date date = opts.first_day + std::chrono::days{d};
        const std::string ds = format_date(date);
        // Days before the first Sunday borrow the first week's level.
        const int week = std::max(0, (d - lead) / 7);
        const double weight = profile[std::chrono::weekday{date}.c_encoding()];
        for (int i = 0; i < n; ++i) {
            for (int mode = 0; mode < 2; ++mode) {
                const auto& s = levels[{i, mode}];
                const double lambda = std::exp(s.level[static_cast<std::size_t>(week)]) / 7.0 * weight;
                const auto count = std::poisson_distribution<long long>(lambda)(rng);
                const bool gap = mode == 1 && man.zone_ids[static_cast<std::size_t>(i)] == man.gap_zone &&
                                 date >= gap_first && date <= gap_last;
                if (gap || count == 0) continue;
                trips += man.zone_ids[static_cast<std::size_t>(i)] + "," + ds + "," + (mode == 0 ? "TNC" : "Taxi") +
                         "," + std::to_string(count) + "\n";
            }
        }
        for (int mode = 0; mode < 2; ++mode) {
            const auto count = std::poisson_distribution<long long>(3.0)(rng);
            if (count > 0) {
                trips += man.low_volume_zone + "," + ds + "," + (mode == 0 ? "TNC" : "Taxi") + "," +
                         std::to_string(count) + "\n";
            }
        }
        const bool rain = uniform(rng, 0, 1) < 0.3;
        const double precip = rain ? std::round(std::exponential_distribution<double>(1 / 0.3)(rng) * 100) / 100 : 0.0;
        const auto events = std::poisson_distribution<int>(2.0)(rng);
        exog += ds + "," + csv::format_number(precip) + "," + std::to_string(events) + "," +
                (is_holiday(date) ? "1" : "0") + "\n";
    }

    std::string cov = "zone_id";
    for (auto name : kCovariateNames) cov += "," + std::string(name);
    cov += ",FulltimeEmp\n";
    for (int i = 0; i < n; ++i) {
        std::array<double, 8> shares{};
        double total = 0.0;
        for (auto& s : shares) {
            s = std::gamma_distribution<double>(2.0, 1.0)(rng);
            total += s;
        }
        cov += man.zone_ids[static_cast<std::size_t>(i)];
        for (double s : shares) cov += "," + csv::format_number(std::round(s / total * 1e4) / 1e4);
        const double pop = std::round(uniform(rng, 5, 40) * 100) / 100;
        const double ft = std::round(uniform(rng, 1, 20) * 100) / 100;
        const double age = std::round(uniform(rng, 28, 50) * 10) / 10;
        const double earn = std::round(uniform(rng, 30000, 90000));
        const double emp = std::round(ft * uniform(rng, 50, 400));
        cov += "," + csv::format_number(pop) + "," + csv::format_number(ft) + "," + csv::format_number(age) + "," +
               csv::format_number(earn) + "," + csv::format_number(emp) + "\n";
    }

    std::vector<std::string> ids(man.zone_ids);
    json features = json::array();
    const auto grid = grid_geometries(opts.rows, opts.cols, ids);
    for (const auto& g : grid) {
        json ring = json::array();
        for (const auto& p : g.parts[0].outer) {
            // Roughly 1 km cells placed near lower Manhattan.
            ring.push_back({-74.02 + 0.012 * p.x(), 40.74 + 0.009 * p.y()});
        }
        features.push_back({{"type", "Feature"},
                            {"properties", {{"zone_id", g.zone_id}}},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}}});
    }
    const json geo = {{"type", "FeatureCollection"}, {"features", features}};

    const json planted = {{"high_block", man.high_block},
                          {"low_block", man.low_block},
                          {"low_volume_zone", man.low_volume_zone},
                          {"gap_zone", man.gap_zone},
                          {"rows", opts.rows},
                          {"cols", opts.cols},
                          {"weeks", opts.weeks},
                          {"seed", opts.seed}};

    const json config = {
        {"trips", "trips.csv"},
        {"geometry", "zones.geojson"},
        {"covariates", "covariates.csv"},
        {"exogenous", "exogenous.csv"},
        {"output_dir", "output"},
        {"study_window", {{"first", format_date(opts.first_day)}, {"last", format_date(last_day)}}},
        {"week_anchor", "Sunday"},
        {"modes", {"TNC", "Taxi"}},
        {"gaps",
         {{{"zone_id", man.gap_zone},
           {"mode", "Taxi"},
           {"date_ranges", {{{"first", format_date(gap_first)}, {"last", format_date(gap_last)}}}}}}},
        {"low_volume_threshold", 10},
        {"seasonal_period", 4},
        {"order_caps", {{"p", 3}, {"q", 3}, {"P", 1}, {"Q", 1}}},
        {"lag", 12},
        {"alpha", 0.05},
        {"n_perm", 999},
        {"weights", {{"rule", "SharedPoint"}, {"style", "Binary"}}},
        {"windows", {"Full", "Segment", "Season", "Month"}},
        {"seed", opts.seed}};

    write_file(dir / "trips.csv", trips);
    write_file(dir / "exogenous.csv", exog);
    write_file(dir / "covariates.csv", cov);
    write_file(dir / "zones.geojson", geo.dump(1) + "\n");
    write_file(dir / "planted.json", planted.dump(2) + "\n");
    write_file(dir / "config.json", config.dump(2) + "\n");
    man.files = {"trips.csv", "exogenous.csv", "covariates.csv", "zones.geojson", "planted.json", "config.json"};
    return man;
}

}  // namespace stz
