#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lppl/detail/text.hpp"
#include "lppl/error.hpp"
#include "lppl/timebase.hpp"

namespace lppl {

/// Which side of the model a series (or parameter set) lives on: p(t) or ln p(t).
enum class Scale { raw, log };

inline std::string_view to_string(Scale s) noexcept { return s == Scale::raw ? "raw" : "log"; }

inline Scale scale_from_string(std::string_view s) {
    if (s == "raw") return Scale::raw;
    if (s == "log") return Scale::log;
    throw Error(ErrorKind::config, "unknown scale '" + std::string(s) + "' (expected raw|log)");
}

/// Smallest window the fitter accepts.
inline constexpr std::size_t kDefaultMinPoints = 8;

/// Immutable, time-ordered price observations on the decimal-year axis.
class PriceSeries {
public:
    PriceSeries(std::vector<double> times, std::vector<double> prices, Scale scale = Scale::raw,
                std::string label = {})
        : times_(std::move(times)), prices_(std::move(prices)), scale_(scale), label_(std::move(label)) {
        if (times_.size() != prices_.size())
            throw Error(ErrorKind::validation, "time and price columns differ in length");
        if (times_.size() < 2) throw Error(ErrorKind::validation, "a series needs at least 2 points");
        for (std::size_t i = 0; i < times_.size(); ++i) {
            if (!std::isfinite(times_[i])) throw Error(ErrorKind::validation, "non-finite time");
            if (i > 0 && !(times_[i] > times_[i - 1]))
                throw Error(ErrorKind::validation, "times must be strictly increasing (index " +
                                                       std::to_string(i) + ")");
            if (!std::isfinite(prices_[i]))
                throw Error(ErrorKind::validation, "non-finite price at index " + std::to_string(i));
            if (scale_ == Scale::raw && !(prices_[i] > 0.0))
                throw Error(ErrorKind::validation,
                            "raw-scale price must be positive at index " + std::to_string(i));
        }
    }

    std::size_t size() const noexcept { return times_.size(); }
    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> prices() const noexcept { return prices_; }
    double time(std::size_t i) const { return times_.at(i); }
    double price(std::size_t i) const { return prices_.at(i); }
    double front_time() const noexcept { return times_.front(); }
    double back_time() const noexcept { return times_.back(); }
    Scale scale() const noexcept { return scale_; }
    const std::string& label() const noexcept { return label_; }

    /// Median spacing between consecutive observations, in years.
    double sample_interval() const {
        std::vector<double> gaps(times_.size() - 1);
        for (std::size_t i = 1; i < times_.size(); ++i) gaps[i - 1] = times_[i] - times_[i - 1];
        auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
        std::nth_element(gaps.begin(), mid, gaps.end());
        return *mid;
    }

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

private:
    std::vector<double> times_;
    std::vector<double> prices_;
    Scale scale_;
    std::string label_;
};

/// Price column to read from a CSV file. `price` is the column written by write_csv.
enum class PriceColumn { close, adjusted_close, price };

inline PriceColumn price_column_from_string(std::string_view s) {
    if (s == "close") return PriceColumn::close;
    if (s == "adjclose" || s == "adjusted_close") return PriceColumn::adjusted_close;
    if (s == "price") return PriceColumn::price;
    throw Error(ErrorKind::config, "unknown price column '" + std::string(s) + "'");
}

namespace detail {

inline std::string_view column_header(PriceColumn c) {
    switch (c) {
        case PriceColumn::close: return "Close";
        case PriceColumn::adjusted_close: return "Adj Close";
        case PriceColumn::price: return "Price";
    }
    return {};
}

}  // namespace detail

/**
 * Reads a comma-separated file with a header row containing `Date` and the
 * requested price column (Yahoo Finance historical exports work as-is).
 *
 * Rows are sorted by date. A repeated date is an error. Yahoo marks missing
 * quotes with `null`; such rows are skipped. February 29 shares its decimal
 * time with February 28, so when both are present the February 29 row is
 * dropped.
 */
inline PriceSeries parse_csv(std::istream& in, PriceColumn column = PriceColumn::close,
                             std::string label = {}) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) {
            for (auto f : detail::split(line, ',')) header.emplace_back(detail::trim(f));
            break;
        }
    }
    if (header.empty()) throw Error(ErrorKind::format, "empty input, no header row");
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

    const auto find = [&](std::string_view name) -> std::ptrdiff_t {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto date_col = find("Date");
    const auto price_col = find(detail::column_header(column));
    if (date_col < 0) throw Error(ErrorKind::format, "header has no 'Date' column");
    if (price_col < 0)
        throw Error(ErrorKind::format,
                    "header has no '" + std::string(detail::column_header(column)) + "' column");

    struct Row {
        CalendarDate date;
        double price;
        std::size_t line;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line, ',');
        const auto where = "line " + std::to_string(line_no);
        if (fields.size() != header.size())
            throw Error(ErrorKind::format, where + ": expected " + std::to_string(header.size()) +
                                               " fields, found " + std::to_string(fields.size()));
        const auto price_text = detail::trim(fields[static_cast<std::size_t>(price_col)]);
        if (price_text == "null") continue;
        CalendarDate date;
        try {
            date = parse_iso_date(detail::trim(fields[static_cast<std::size_t>(date_col)]));
        } catch (const Error& e) {
            throw Error(ErrorKind::format, where + ": " + e.what());
        }
        const auto price = detail::parse_double(price_text);
        if (!price) throw Error(ErrorKind::format, where + ": unparseable price '" + std::string(price_text) + "'");
        if (!std::isfinite(*price) || *price <= 0.0)
            throw Error(ErrorKind::validation, where + ": price must be positive and finite");
        rows.push_back({date, *price, line_no});
    }

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    std::vector<double> times;
    std::vector<double> prices;
    times.reserve(rows.size());
    prices.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].date == rows[i - 1].date)
            throw Error(ErrorKind::validation, "duplicate date " + to_iso(rows[i].date) + " (lines " +
                                                   std::to_string(rows[i - 1].line) + " and " +
                                                   std::to_string(rows[i].line) + ")");
        const double t = date_to_decimal_year(rows[i].date).value();
        if (!times.empty() && t == times.back()) continue;  // Feb 29 after Feb 28
        times.push_back(t);
        prices.push_back(rows[i].price);
    }
    return PriceSeries(std::move(times), std::move(prices), Scale::raw, std::move(label));
}

/// Writes `Date,Price`. Prices use the shortest round-trip representation.
inline void write_csv(std::ostream& out, const PriceSeries& s) {
    out << "Date,Price\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << to_iso(decimal_year_to_date(TimePoint(s.time(i)))) << ','
            << detail::format_double(s.price(i)) << '\n';
    }
}

/// Observations with start <= t <= end.
inline PriceSeries slice_window(const PriceSeries& s, TimePoint start, TimePoint end,
                                std::size_t min_points = kDefaultMinPoints) {
    if (!(start < end)) throw Error(ErrorKind::input, "window start must precede window end");
    const auto times = s.times();
    const auto first = std::lower_bound(times.begin(), times.end(), start.value());
    const auto last = std::upper_bound(times.begin(), times.end(), end.value());
    const auto count = static_cast<std::size_t>(std::max<std::ptrdiff_t>(last - first, 0));
    if (count < std::max<std::size_t>(min_points, 2))
        throw Error(ErrorKind::empty_window, "window [" + detail::format_double(start.value()) + ", " +
                                                 detail::format_double(end.value()) + "] holds " +
                                                 std::to_string(count) + " points, need " +
                                                 std::to_string(std::max<std::size_t>(min_points, 2)));
    const auto offset = first - times.begin();
    std::vector<double> t(first, last);
    std::vector<double> p(s.prices().begin() + offset, s.prices().begin() + offset + static_cast<std::ptrdiff_t>(count));
    return PriceSeries(std::move(t), std::move(p), s.scale(), s.label());
}

inline PriceSeries log_transform(const PriceSeries& s) {
    if (s.scale() != Scale::raw) throw Error(ErrorKind::state, "series is already log-scale");
    std::vector<double> p(s.size());
    std::transform(s.prices().begin(), s.prices().end(), p.begin(), [](double x) { return std::log(x); });
    return PriceSeries(std::vector<double>(s.times().begin(), s.times().end()), std::move(p), Scale::log,
                       s.label());
}

}  // namespace lppl
