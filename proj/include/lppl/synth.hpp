#pragma once

/** @file
 * Synthetic LPPL series for parameter-recovery testing.
 *
 * Noise generator (fixed so fixtures stay stable): std::mt19937_64 seeded with
 * `seed`; each 64-bit draw becomes a uniform u = (x >> 11) * 2^-53 in [0, 1);
 * Gaussian pairs come from Box-Muller, z0 = r cos(2πv), z1 = r sin(2πv) with
 * r = sqrt(-2 ln(1 - u)), consumed in order z0, z1, z0, z1, ...
 *
 * Noise is additive in the units of `params.scale`; on the log scale that is
 * multiplicative noise on the price itself.
 */

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "lppl/error.hpp"
#include "lppl/model.hpp"
#include "lppl/series.hpp"
#include "lppl/timebase.hpp"

namespace lppl {

/// uniform: evenly spaced; trading_days: weekdays only, evenly subsampled.
enum class Spacing { uniform, trading_days };

inline std::string_view to_string(Spacing s) noexcept {
    return s == Spacing::uniform ? "uniform" : "trading_days";
}

inline Spacing spacing_from_string(std::string_view s) {
    if (s == "uniform") return Spacing::uniform;
    if (s == "trading_days") return Spacing::trading_days;
    throw Error(ErrorKind::config, "unknown spacing '" + std::string(s) + "'");
}

struct SynthSpec {
    LpplParams params;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t n_points = 0;
    Spacing spacing = Spacing::uniform;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

class GaussianNoise {
public:
    explicit GaussianNoise(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
        const double v = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(v);
        has_spare_ = true;
        return r * std::cos(v);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace detail {

// Observation days as ordinals on the 365-day axis (see timebase.hpp).
inline std::vector<long long> sample_days(const SynthSpec& spec) {
    const auto first = static_cast<long long>(std::ceil(spec.t_start * kDaysPerYear - 1e-9));
    const auto last = static_cast<long long>(std::floor(spec.t_end * kDaysPerYear + 1e-9));
    std::vector<long long> pool;
    if (spec.spacing == Spacing::uniform) {
        const double h = static_cast<double>(last - first) / static_cast<double>(spec.n_points - 1);
        for (std::size_t i = 0; i < spec.n_points; ++i)
            pool.push_back(first + std::llround(static_cast<double>(i) * h));
        for (std::size_t i = 1; i < pool.size(); ++i)
            if (pool[i] <= pool[i - 1])
                throw Error(ErrorKind::generation, "n_points exceeds the number of calendar days in range");
        return pool;
    }
    for (long long d = first; d <= last; ++d) {
        const auto date = date_from_ordinal(d);
        const auto wd = weekday(date);
        if (wd != 0 && wd != 6) pool.push_back(d);
    }
    if (pool.size() < spec.n_points)
        throw Error(ErrorKind::generation, "only " + std::to_string(pool.size()) + " weekdays in range, n_points is " +
                                               std::to_string(spec.n_points));
    std::vector<long long> picked;
    const double stride =
        spec.n_points > 1 ? static_cast<double>(pool.size() - 1) / static_cast<double>(spec.n_points - 1) : 0.0;
    for (std::size_t i = 0; i < spec.n_points; ++i)
        picked.push_back(pool[static_cast<std::size_t>(std::llround(static_cast<double>(i) * stride))]);
    return picked;
}

}  // namespace detail

inline void validate(const SynthSpec& spec) {
    validate(spec.params);
    if (spec.n_points < 2) throw Error(ErrorKind::config, "n_points must be at least 2");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
        throw Error(ErrorKind::config, "noise_sigma must be finite and non-negative");
    if (!(spec.t_start < spec.t_end)) throw Error(ErrorKind::config, "t_start must precede t_end");
    if (!(spec.t_end < spec.params.tc)) throw Error(ErrorKind::config, "t_end must precede tc");
    (void)TimePoint(spec.t_start);
    (void)TimePoint(spec.t_end);
}

/**
 * Samples the model on calendar days (so the series survives a CSV round
 * trip unchanged) and adds seeded Gaussian noise.
 */
inline PriceSeries generate(const SynthSpec& spec) {
    validate(spec);
    const auto days = detail::sample_days(spec);
    std::vector<double> times(days.size());
    std::vector<double> prices(days.size());
    GaussianNoise noise(spec.seed);
    for (std::size_t i = 0; i < days.size(); ++i) {
        times[i] = static_cast<double>(days[i]) / kDaysPerYear;
        if (!(times[i] < spec.params.tc))
            throw Error(ErrorKind::generation, "sample time " + detail::format_double(times[i]) + " is not before tc");
        prices[i] = evaluate(spec.params, times[i]);
        if (spec.noise_sigma > 0.0) prices[i] += spec.noise_sigma * noise.next();
        if (spec.params.scale == Scale::raw && !(prices[i] > 0.0))
            throw Error(ErrorKind::generation, "non-positive price " + detail::format_double(prices[i]) +
                                                   " at point " + std::to_string(i) + " (" +
                                                   to_iso(detail::date_from_ordinal(days[i])) + ")");
    }
    return PriceSeries(std::move(times), std::move(prices), spec.params.scale, "synthetic");
}

}  // namespace lppl
