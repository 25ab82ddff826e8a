#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stz/calendar.hpp"

namespace stz {

enum class Mode { TNC, Taxi };

std::string to_string(Mode m);
/// Case-insensitive; accepts "TNC" and "Taxi".
std::optional<Mode> parse_mode(std::string_view text);

struct TripRecord {
    std::string zone_id;
    Date pickup_date;
    Mode mode;
    std::int64_t count = 1;

    friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

/// Column mapping for a delimited trips file.
struct TripSchema {
    std::string zone_column = "zone_id";
    std::string date_column = "pickup_date";
    /// Empty when the file holds a single mode; fixed_mode is then used.
    std::string mode_column = "mode";
    /// Empty for event rows (one trip per row).
    std::string count_column = "count";
    std::optional<Mode> fixed_mode;
    char delimiter = ',';
};

/// Parses trip rows. Throws EmptySource when only a header (or nothing) is
/// present and MalformedRow (1-based line number, header is line 1) for the
/// first row that cannot be parsed.
std::vector<TripRecord> parse_trips(std::istream& source, const TripSchema& schema = {});

/// Declares days with no data for a zone (or every zone via "*") and mode.
struct GapDeclaration {
    std::string zone_id = "*";
    Mode mode = Mode::Taxi;
    std::vector<DateRange> ranges;

    bool covers(const std::string& zone, Mode m, Date d) const;
};

/// Daily counts over a gap-free calendar; unobserved days hold nullopt.
struct DailySeries {
    std::string zone_id;
    Date first;
    std::vector<std::optional<double>> counts;

    Date date_at(std::size_t i) const { return first + std::chrono::days{static_cast<long>(i)}; }
    std::size_t size() const noexcept { return counts.size(); }
    bool has_missing() const;
    /// Mean over observed days (NaN if none observed).
    double mean_observed() const;
};

using DailyMap = std::map<std::string, DailySeries>;

/// Sums records of one mode per zone and date within the window. A zone/date
/// with no record is zero unless a gap declaration covers it, in which case
/// it is missing. Records outside the window are ignored.
DailyMap build_daily(const std::vector<TripRecord>& records, const DateRange& window, Mode mode,
                     const std::vector<GapDeclaration>& gaps = {});

/// Replaces every missing day with the mean of the observed values falling on
/// the same weekday. Throws UnimputableWeekday when a weekday with a missing
/// entry has no observed value.
DailySeries impute_local_average(const DailySeries& series);

struct LowVolumeFilter {
    DailyMap kept;
    std::vector<std::string> removed;
};

/// Removes zones whose mean daily count is strictly below the threshold.
LowVolumeFilter filter_low_volume(const DailyMap& daily, double threshold = 10.0);

/// One day of exogenous inputs.
struct ExogDay {
    Date date;
    double precipitation_in = 0.0;
    std::int64_t event_count = 0;
    bool holiday = false;
};

/// Reads "date,precipitation_in,event_count,holiday" rows.
std::vector<ExogDay> parse_exogenous(std::istream& source);

struct WeeklyExog {
    double precipitation_in = 0.0;  ///< mean over the week's days
    std::int64_t event_count = 0;   ///< sum over the week's days
    int holiday_flag = 0;           ///< 1 iff any day is a holiday
};

/// Zone-by-week count panel for one mode.
struct WeeklyPanel {
    Mode mode = Mode::TNC;
    std::vector<std::string> zone_ids;
    std::vector<Date> week_starts;
    Eigen::MatrixXd counts;  ///< zones x weeks
    std::vector<WeeklyExog> exog;

    Eigen::Index zones() const noexcept { return counts.rows(); }
    Eigen::Index weeks() const noexcept { return counts.cols(); }
    std::optional<Eigen::Index> zone_index(const std::string& id) const;
};

/// Sums daily counts into 7-day windows starting on week_anchor. Leading days
/// before the first anchor weekday are dropped; the remainder must be a whole
/// number of weeks (else PartialWeek). Series must be complete (no missing).
WeeklyPanel aggregate_weekly(const DailyMap& daily, Mode mode,
                             std::chrono::weekday week_anchor = std::chrono::Sunday,
                             const std::vector<ExogDay>& exog_daily = {});

void write_panel_csv(std::ostream& out, const WeeklyPanel& panel);

}  // namespace stz
