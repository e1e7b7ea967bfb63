#pragma once

/** @file
 * Decimal-year time axis.
 *
 * Times are expressed as `year + day_of_year / 365` on a fixed 365-day
 * calendar: January 1 is day 1, December 31 is day 365, and February 29 is
 * folded onto day 59 (the same value as February 28). Under this convention
 * 2017-10-19 is exactly 2017.80.
 */

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "lppl/error.hpp"

namespace lppl {

inline constexpr double kMinDecimalYear = 1800.0;
inline constexpr double kMaxDecimalYear = 2200.0;
inline constexpr int kDaysPerYear = 365;

/// A point on the decimal-year axis, restricted to [1800, 2200].
class TimePoint {
public:
    explicit TimePoint(double years) : value_(years) {
        if (!std::isfinite(years) || years < kMinDecimalYear || years > kMaxDecimalYear) {
            throw Error(ErrorKind::input, "decimal year " + std::to_string(years) +
                                              " outside [1800, 2200]");
        }
    }

    double value() const noexcept { return value_; }

    friend auto operator<=>(const TimePoint&, const TimePoint&) = default;

private:
    double value_;
};

/// A Gregorian calendar date. Validity is checked by the conversion functions.
struct CalendarDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    friend auto operator<=>(const CalendarDate&, const CalendarDate&) = default;
};

namespace detail {

inline constexpr std::array<int, 12> kCumulativeDays = {0,   31,  59,  90,  120, 151,
                                                        181, 212, 243, 273, 304, 334};
inline constexpr std::array<unsigned, 12> kMonthLength = {31, 28, 31, 30, 31, 30,
                                                          31, 31, 30, 31, 30, 31};

constexpr bool is_leap(int year) noexcept {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

// Day ordinal on the 365-day axis: year * 365 + day_of_year.
inline long long day_ordinal(const CalendarDate& d) {
    const int doy = kCumulativeDays[d.month - 1] +
                    static_cast<int>(d.month == 2 && d.day == 29 ? 28 : d.day);
    return static_cast<long long>(d.year) * kDaysPerYear + doy;
}

inline CalendarDate date_from_ordinal(long long ordinal) {
    // ordinal = year * 365 + doy with doy in [1, 365]
    // years on this axis are positive, so truncating division is floor
    const long long year = (ordinal - 1) / kDaysPerYear;
    const int doy = static_cast<int>(ordinal - year * kDaysPerYear);
    unsigned month = 12;
    while (kCumulativeDays[month - 1] >= doy) --month;
    return {static_cast<int>(year), month, static_cast<unsigned>(doy - kCumulativeDays[month - 1])};
}

}  // namespace detail

inline bool is_valid(const CalendarDate& d) noexcept {
    if (d.month < 1 || d.month > 12 || d.day < 1) return false;
    unsigned length = detail::kMonthLength[d.month - 1];
    if (d.month == 2 && detail::is_leap(d.year)) length = 29;
    return d.day <= length;
}

/// Day of year on the fixed 365-day calendar (Feb 29 shares day 59 with Feb 28).
inline int day_of_year(const CalendarDate& d) {
    if (!is_valid(d)) throw Error(ErrorKind::input, "invalid calendar date");
    return static_cast<int>(detail::day_ordinal(d) - static_cast<long long>(d.year) * kDaysPerYear);
}

inline std::string to_iso(const CalendarDate& d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
inline CalendarDate parse_iso_date(std::string_view text) {
    auto fail = [&] { return Error(ErrorKind::input, "not an ISO date: '" + std::string(text) + "'"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw fail();
    CalendarDate d;
    auto field = [&](std::size_t pos, std::size_t len, auto& out) {
        const char* first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, out);
        if (ec != std::errc{} || ptr != first + len) throw fail();
    };
    field(0, 4, d.year);
    field(5, 2, d.month);
    field(8, 2, d.day);
    if (!is_valid(d)) throw fail();
    return d;
}

inline TimePoint date_to_decimal_year(const CalendarDate& d) {
    if (!is_valid(d)) throw Error(ErrorKind::input, "invalid calendar date " + to_iso(d));
    // One correctly rounded division of exact integers.
    return TimePoint(static_cast<double>(detail::day_ordinal(d)) / kDaysPerYear);
}

/// Nearest calendar date to `t`; exact ties resolve to the earlier date.
inline CalendarDate decimal_year_to_date(TimePoint t) {
    const double x = t.value() * kDaysPerYear;
    const auto lower = static_cast<long long>(std::floor(x));
    const double d_lower = std::abs(static_cast<double>(lower) / kDaysPerYear - t.value());
    const double d_upper = std::abs(static_cast<double>(lower + 1) / kDaysPerYear - t.value());
    return detail::date_from_ordinal(d_upper < d_lower ? lower + 1 : lower);
}

/// Snaps a decimal year to the value of its nearest calendar date.
inline double snap_to_day(double years) {
    return date_to_decimal_year(decimal_year_to_date(TimePoint(years))).value();
}

/// Real (Gregorian) day of week; 0 = Sunday ... 6 = Saturday.
inline unsigned weekday(const CalendarDate& d) {
    using namespace std::chrono;
    const year_month_day ymd{year{d.year}, month{d.month}, day{d.day}};
    return std::chrono::weekday{sys_days{ymd}}.c_encoding();
}

}  // namespace lppl
