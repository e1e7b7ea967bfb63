#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lppl/error.hpp"
#include "lppl/fitting.hpp"
#include "lppl/parallel.hpp"
#include "lppl/series.hpp"
#include "lppl/timebase.hpp"

namespace lppl {

inline constexpr double kDefaultStabilityThreshold = 0.25;
inline constexpr std::size_t kDefaultMinSuccesses = 3;

struct ScanEntry {
    double start = 0.0;
    double end = 0.0;
    std::optional<FitResult> fit;
    std::string failure;  ///< set when fit is empty
};

struct ScanResult {
    std::vector<ScanEntry> entries;  ///< ascending by start
    double tc_median = 0.0;
    double tc_iqr = 0.0;
    bool stable = false;
    std::size_t successes = 0;
    double stability_threshold = kDefaultStabilityThreshold;
    std::size_t min_successes = kDefaultMinSuccesses;
};

class ScanFailed : public Error {
public:
    ScanFailed(const std::string& what, std::vector<ScanEntry> entries)
        : Error(ErrorKind::scan_failed, what), entries_(std::move(entries)) {}
    const std::vector<ScanEntry>& entries() const noexcept { return entries_; }

private:
    std::vector<ScanEntry> entries_;
};

namespace detail {

// Linear-interpolation quantile on sorted data (the common "type 7" rule).
inline double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

/// Median and interquartile range of the successful tc estimates.
inline void summarize(ScanResult& r) {
    std::vector<double> tcs;
    for (const auto& e : r.entries)
        if (e.fit) tcs.push_back(e.fit->params.tc);
    r.successes = tcs.size();
    if (tcs.empty()) return;
    std::sort(tcs.begin(), tcs.end());
    r.tc_median = detail::quantile_sorted(tcs, 0.5);
    r.tc_iqr = detail::quantile_sorted(tcs, 0.75) - detail::quantile_sorted(tcs, 0.25);
    r.stable = r.tc_iqr <= r.stability_threshold && r.successes >= r.min_successes;
}

/**
 * Fits [start, end] for every start independently. Failed windows are
 * recorded and do not stop the scan. The stability criterion (tc IQR within
 * the threshold over at least min_successes windows) is this toolkit's own
 * operationalisation of "trend and oscillations clearly visible".
 */
inline ScanResult scan_windows(const PriceSeries& s, std::span<const TimePoint> starts, TimePoint end,
                               const FitConfig& cfg, double stability_threshold = kDefaultStabilityThreshold,
                               std::size_t min_successes = kDefaultMinSuccesses) {
    validate(cfg);
    if (starts.empty()) throw Error(ErrorKind::config, "no window starts given");
    if (!(stability_threshold >= 0.0)) throw Error(ErrorKind::config, "stability threshold must be non-negative");
    for (const auto& st : starts)
        if (!(st < end)) throw Error(ErrorKind::input, "every window start must precede the end");

    std::vector<double> sorted;
    for (const auto& st : starts) sorted.push_back(st.value());
    std::sort(sorted.begin(), sorted.end());

    ScanResult result;
    result.stability_threshold = stability_threshold;
    result.min_successes = min_successes;
    result.entries.resize(sorted.size());

    FitConfig inner = cfg;
    inner.threads = 1;
    parallel_for(sorted.size(), cfg.threads, [&](std::size_t i) {
        auto& e = result.entries[i];
        e.start = sorted[i];
        e.end = end.value();
        try {
            e.fit = fit(slice_window(s, TimePoint(sorted[i]), end, cfg.min_points), inner);
        } catch (const Error& err) {
            e.failure = err.what();
        }
    });

    summarize(result);
    if (result.successes == 0) {
        std::string what = "no window produced a fit";
        for (const auto& e : result.entries)
            what += "; [" + detail::format_double(e.start) + ", " + detail::format_double(e.end) + "]: " + e.failure;
        throw ScanFailed(what, std::move(result.entries));
    }
    return result;
}

}  // namespace lppl
