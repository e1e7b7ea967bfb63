#pragma once

#include <string>
#include <string_view>

#include "lppl/error.hpp"
#include "lppl/fitting.hpp"
#include "lppl/model.hpp"
#include "lppl/timebase.hpp"

namespace lppl {

enum class Regime { bubble, antibubble };

inline std::string_view to_string(Regime r) noexcept { return r == Regime::bubble ? "bubble" : "antibubble"; }

/// Lead of the crash ahead of the critical time: 1.4 months.
inline constexpr double kCrashLeadYears = 1.4 / 12.0;

inline constexpr std::string_view kLeadConvention =
    "crash window = [tc - 1.4/12 yr, tc], dates rounded to the nearest day of the fixed 365-day calendar";

struct Forecast {
    CalendarDate tc_date;
    CalendarDate window_start;
    CalendarDate window_end;
    Regime regime = Regime::bubble;
    FitResult source_fit;
};

/**
 * A bubble is a trend A + B τ^α that rises as t approaches tc. Its time
 * derivative is -αB τ^(α-1), whose sign is fixed over the whole domain, so
 * the regime is bubble exactly when αB < 0.
 */
inline Regime classify_regime(const LpplParams& p) {
    validate(p);
    if (p.B == 0.0) throw Error(ErrorKind::indeterminate_regime, "B = 0: the trend is flat");
    return p.alpha * p.B < 0.0 ? Regime::bubble : Regime::antibubble;
}

inline Forecast crash_window(const FitResult& fr) {
    if (!fr.converged) throw Error(ErrorKind::unreliable_forecast, "fit did not converge; refusing to forecast");
    Forecast f;
    f.tc_date = decimal_year_to_date(TimePoint(fr.params.tc));
    f.window_start = decimal_year_to_date(TimePoint(fr.params.tc - kCrashLeadYears));
    f.window_end = f.tc_date;
    f.regime = classify_regime(fr.params);
    f.source_fit = fr;
    return f;
}

inline std::string summary(const Forecast& f) {
    std::string s = "Critical time " + detail::format_double(f.source_fit.params.tc) + " (" + to_iso(f.tc_date) +
                    "), regime: " + std::string(to_string(f.regime)) + ". Expected crash window " +
                    to_iso(f.window_start) + " to " + to_iso(f.window_end) + ", from a fit over " +
                    std::to_string(f.source_fit.n_points) + " observations (RMSE " +
                    detail::format_double(f.source_fit.rmse) + "). Lead-time convention: " +
                    std::string(kLeadConvention) + ".";
    return s;
}

}  // namespace lppl
