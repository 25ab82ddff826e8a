#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace stz {

using Date = std::chrono::sys_days;

/// Inclusive calendar range [first, last].
struct DateRange {
    Date first;
    Date last;

    bool contains(Date d) const noexcept { return d >= first && d <= last; }
    long days() const noexcept { return (last - first).count() + 1; }
};

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Returns nullopt for
/// malformed text or impossible dates such as 2015-13-40.
std::optional<Date> parse_date(std::string_view text);

/// Like parse_date but throws ConfigError naming the offending text.
Date require_date(std::string_view text);

std::string format_date(Date d);

std::optional<std::chrono::weekday> parse_weekday(std::string_view name);
std::string weekday_name(std::chrono::weekday wd);

/// 1..12
unsigned month_of(Date d);

}  // namespace stz
