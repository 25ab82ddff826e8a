#include "stz/ingest.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "stz/csv.hpp"
#include "stz/errors.hpp"

namespace stz {

std::string to_string(Mode m) { return m == Mode::TNC ? "TNC" : "Taxi"; }

std::optional<Mode> parse_mode(std::string_view text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "tnc") return Mode::TNC;
    if (lower == "taxi") return Mode::Taxi;
    return std::nullopt;
}

namespace {

std::optional<std::int64_t> parse_count(std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_real(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::size_t require_column(const csv::Header& header, const std::string& name) {
    auto idx = header.find(name);
    if (!idx) throw MalformedRow(1, "missing column '" + name + "'");
    return *idx;
}

}  // namespace

std::vector<TripRecord> parse_trips(std::istream& source, const TripSchema& schema) {
    std::string line;
    if (!csv::next_line(source, line)) throw EmptySource();
    const csv::Header header(csv::split_line(line, schema.delimiter));

    const std::size_t zone_col = require_column(header, schema.zone_column);
    const std::size_t date_col = require_column(header, schema.date_column);
    std::optional<std::size_t> mode_col;
    std::optional<std::size_t> count_col;
    if (!schema.mode_column.empty()) mode_col = require_column(header, schema.mode_column);
    if (!schema.count_column.empty()) count_col = require_column(header, schema.count_column);
    if (!mode_col && !schema.fixed_mode) throw MalformedRow(1, "no mode column and no fixed mode configured");

    std::vector<TripRecord> out;
    std::size_t row = 1;
    while (std::getline(source, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = csv::split_line(line, schema.delimiter);
        if (fields.size() != header.size()) {
            throw MalformedRow(row, "expected " + std::to_string(header.size()) + " fields, found " +
                                        std::to_string(fields.size()));
        }
        TripRecord rec;
        rec.zone_id = csv::trim(fields[zone_col]);
        if (rec.zone_id.empty()) throw MalformedRow(row, "empty zone id");

        const auto date = parse_date(csv::trim(fields[date_col]));
        if (!date) throw MalformedRow(row, "bad date '" + fields[date_col] + "'");
        rec.pickup_date = *date;

        if (mode_col) {
            const auto m = parse_mode(csv::trim(fields[*mode_col]));
            if (!m) throw MalformedRow(row, "bad mode '" + fields[*mode_col] + "'");
            rec.mode = *m;
        } else {
            rec.mode = *schema.fixed_mode;
        }

        if (count_col) {
            const auto c = parse_count(csv::trim(fields[*count_col]));
            if (!c) throw MalformedRow(row, "bad count '" + fields[*count_col] + "'");
            if (*c < 0) throw MalformedRow(row, "negative count");
            rec.count = *c;
        }
        out.push_back(std::move(rec));
    }
    if (out.empty()) throw EmptySource();
    return out;
}

bool GapDeclaration::covers(const std::string& zone, Mode m, Date d) const {
    if (m != mode) return false;
    if (zone_id != "*" && zone_id != zone) return false;
    for (const auto& r : ranges) {
        if (r.contains(d)) return true;
    }
    return false;
}

bool DailySeries::has_missing() const {
    for (const auto& c : counts) {
        if (!c) return true;
    }
    return false;
}

double DailySeries::mean_observed() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : counts) {
        if (c) {
            sum += *c;
            ++n;
        }
    }
    return n == 0 ? std::nan("") : sum / static_cast<double>(n);
}

DailyMap build_daily(const std::vector<TripRecord>& records, const DateRange& window, Mode mode,
                     const std::vector<GapDeclaration>& gaps) {
    const auto ndays = static_cast<std::size_t>(window.days());
    struct Accum {
        std::vector<double> sum;
        std::vector<bool> seen;
    };
    std::map<std::string, Accum> acc;
    for (const auto& r : records) {
        if (r.mode != mode || !window.contains(r.pickup_date)) continue;
        auto& a = acc[r.zone_id];
        if (a.sum.empty()) {
            a.sum.assign(ndays, 0.0);
            a.seen.assign(ndays, false);
        }
        const auto i = static_cast<std::size_t>((r.pickup_date - window.first).count());
        a.sum[i] += static_cast<double>(r.count);
        a.seen[i] = true;
    }

    DailyMap out;
    for (auto& [zone, a] : acc) {
        DailySeries s{zone, window.first, {}};
        s.counts.resize(ndays);
        for (std::size_t i = 0; i < ndays; ++i) {
            if (a.seen[i]) {
                s.counts[i] = a.sum[i];
                continue;
            }
            const Date d = s.date_at(i);
            bool gap = false;
            for (const auto& g : gaps) {
                if (g.covers(zone, mode, d)) {
                    gap = true;
                    break;
                }
            }
            if (!gap) s.counts[i] = 0.0;
        }
        out.emplace(zone, std::move(s));
    }
    return out;
}

DailySeries impute_local_average(const DailySeries& series) {
    std::array<double, 7> sum{};
    std::array<std::size_t, 7> n{};
    std::array<bool, 7> needed{};
    for (std::size_t i = 0; i < series.size(); ++i) {
        const unsigned wd = std::chrono::weekday{series.date_at(i)}.c_encoding();
        if (series.counts[i]) {
            sum[wd] += *series.counts[i];
            ++n[wd];
        } else {
            needed[wd] = true;
        }
    }
    for (unsigned wd = 0; wd < 7; ++wd) {
        if (needed[wd] && n[wd] == 0) throw UnimputableWeekday(weekday_name(std::chrono::weekday{wd}));
    }
    DailySeries out = series;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!out.counts[i]) {
            const unsigned wd = std::chrono::weekday{out.date_at(i)}.c_encoding();
            out.counts[i] = sum[wd] / static_cast<double>(n[wd]);
        }
    }
    return out;
}

LowVolumeFilter filter_low_volume(const DailyMap& daily, double threshold) {
    if (threshold < 0) throw Error("low-volume threshold must be nonnegative");
    LowVolumeFilter out;
    for (const auto& [zone, s] : daily) {
        const double m = s.mean_observed();
        if (std::isnan(m) || m < threshold) {
            out.removed.push_back(zone);
        } else {
            out.kept.emplace(zone, s);
        }
    }
    return out;
}

std::vector<ExogDay> parse_exogenous(std::istream& source) {
    std::string line;
    if (!csv::next_line(source, line)) throw EmptySource();
    const csv::Header header(csv::split_line(line));
    const std::size_t c_date = require_column(header, "date");
    const std::size_t c_precip = require_column(header, "precipitation_in");
    const std::size_t c_events = require_column(header, "event_count");
    const std::size_t c_holiday = require_column(header, "holiday");

    std::vector<ExogDay> out;
    std::size_t row = 1;
    while (std::getline(source, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto f = csv::split_line(line);
        if (f.size() != header.size()) throw MalformedRow(row, "wrong field count");
        ExogDay day;
        const auto d = parse_date(csv::trim(f[c_date]));
        if (!d) throw MalformedRow(row, "bad date '" + f[c_date] + "'");
        day.date = *d;
        const auto p = parse_real(csv::trim(f[c_precip]));
        if (!p || *p < 0) throw MalformedRow(row, "bad precipitation '" + f[c_precip] + "'");
        day.precipitation_in = *p;
        const auto e = parse_count(csv::trim(f[c_events]));
        if (!e || *e < 0) throw MalformedRow(row, "bad event count '" + f[c_events] + "'");
        day.event_count = *e;
        const auto h = csv::trim(f[c_holiday]);
        if (h != "0" && h != "1") throw MalformedRow(row, "holiday must be 0 or 1");
        day.holiday = h == "1";
        out.push_back(day);
    }
    if (out.empty()) throw EmptySource();
    return out;
}

std::optional<Eigen::Index> WeeklyPanel::zone_index(const std::string& id) const {
    for (std::size_t i = 0; i < zone_ids.size(); ++i) {
        if (zone_ids[i] == id) return static_cast<Eigen::Index>(i);
    }
    return std::nullopt;
}

WeeklyPanel aggregate_weekly(const DailyMap& daily, Mode mode, std::chrono::weekday week_anchor,
                             const std::vector<ExogDay>& exog_daily) {
    if (daily.empty()) throw Error("no zones to aggregate");
    const DailySeries& ref = daily.begin()->second;
    for (const auto& [zone, s] : daily) {
        if (s.first != ref.first || s.size() != ref.size()) {
            throw DimensionMismatch("zone '" + zone + "' does not share the study window");
        }
        if (s.has_missing()) throw Error("zone '" + zone + "' still has missing days; impute first");
    }

    std::size_t lead = 0;
    while (lead < ref.size() && std::chrono::weekday{ref.date_at(lead)} != week_anchor) ++lead;
    const std::size_t span = ref.size() - lead;
    if (span == 0 || span % 7 != 0) {
        throw PartialWeek("window from " + format_date(ref.date_at(lead)) + " spans " + std::to_string(span) +
                          " days, not a whole number of weeks");
    }
    const std::size_t nweeks = span / 7;

    WeeklyPanel panel;
    panel.mode = mode;
    panel.counts.setZero(static_cast<Eigen::Index>(daily.size()), static_cast<Eigen::Index>(nweeks));
    for (std::size_t w = 0; w < nweeks; ++w) panel.week_starts.push_back(ref.date_at(lead + 7 * w));

    Eigen::Index row = 0;
    for (const auto& [zone, s] : daily) {
        panel.zone_ids.push_back(zone);
        for (std::size_t w = 0; w < nweeks; ++w) {
            double sum = 0.0;
            for (std::size_t k = 0; k < 7; ++k) sum += *s.counts[lead + 7 * w + k];
            panel.counts(row, static_cast<Eigen::Index>(w)) = sum;
        }
        ++row;
    }

    std::map<Date, const ExogDay*> by_date;
    for (const auto& d : exog_daily) by_date[d.date] = &d;
    panel.exog.resize(nweeks);
    for (std::size_t w = 0; w < nweeks; ++w) {
        auto& ex = panel.exog[w];
        double precip = 0.0;
        int seen = 0;
        for (int k = 0; k < 7; ++k) {
            const auto it = by_date.find(panel.week_starts[w] + std::chrono::days{k});
            if (it == by_date.end()) continue;
            precip += it->second->precipitation_in;
            ex.event_count += it->second->event_count;
            if (it->second->holiday) ex.holiday_flag = 1;
            ++seen;
        }
        ex.precipitation_in = seen > 0 ? precip / seen : 0.0;
    }
    return panel;
}

void write_panel_csv(std::ostream& out, const WeeklyPanel& panel) {
    out << "zone_id,week_start,count\n";
    for (Eigen::Index z = 0; z < panel.zones(); ++z) {
        for (Eigen::Index t = 0; t < panel.weeks(); ++t) {
            out << csv::escape(panel.zone_ids[static_cast<std::size_t>(z)]) << ','
                << format_date(panel.week_starts[static_cast<std::size_t>(t)]) << ','
                << csv::format_number(panel.counts(z, t)) << '\n';
        }
    }
}

}  // namespace stz
