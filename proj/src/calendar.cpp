#include "stz/calendar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

#include "stz/errors.hpp"

namespace stz {

namespace {

constexpr std::array<std::string_view, 7> kWeekdays = {"Sunday",   "Monday", "Tuesday", "Wednesday",
                                                       "Thursday", "Friday", "Saturday"};

bool parse_digits(std::string_view s, int& out) {
    if (s.empty()) return false;
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
        !parse_digits(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

Date require_date(std::string_view text) {
    auto d = parse_date(text);
    if (!d) throw ConfigError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    return *d;
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::optional<std::chrono::weekday> parse_weekday(std::string_view name) {
    for (unsigned i = 0; i < kWeekdays.size(); ++i) {
        const auto& w = kWeekdays[i];
        if (w.size() == name.size() &&
            std::equal(w.begin(), w.end(), name.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
            })) {
            return std::chrono::weekday{i};
        }
    }
    return std::nullopt;
}

std::string weekday_name(std::chrono::weekday wd) { return std::string(kWeekdays[wd.c_encoding()]); }

unsigned month_of(Date d) { return static_cast<unsigned>(std::chrono::year_month_day{d}.month()); }

}  // namespace stz
