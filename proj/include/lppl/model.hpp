#pragma once

/** @file
 * The log-periodic power-law model
 *
 *     p(t) = A + B τ^α + τ^α (C1 cos(ω ln τ) + C2 sin(ω ln τ)),   τ = tc − t,
 *
 * and its published form
 *
 *     p(t) = A − m τ^α {1 + C cos(ω ln τ + φ)}.
 *
 * The two are related by B = −m, C1 = −m C cos φ, C2 = m C sin φ. The first
 * form is linear in (A, B, C1, C2), which is what the fitter exploits.
 */

#include <cmath>
#include <numbers>
#include <vector>

#include "lppl/error.hpp"
#include "lppl/series.hpp"

namespace lppl {

struct LpplParams {
    double tc = 0.0;     ///< critical time, decimal years
    double alpha = 0.0;  ///< power-law exponent, signed, nonzero
    double omega = 0.0;  ///< log-angular frequency, positive
    double A = 0.0;
    double B = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    Scale scale = Scale::raw;

    friend bool operator==(const LpplParams&, const LpplParams&) = default;
};

/// Constants exactly as they appear in the published form of the model.
struct PublishedParams {
    double A = 0.0;
    double m = 0.0;
    double C = 0.0;
    double alpha = 0.0;
    double omega = 0.0;
    double phi = 0.0;
    double tc = 0.0;
};

inline void validate(const LpplParams& p) {
    if (!std::isfinite(p.tc)) throw Error(ErrorKind::input, "tc must be finite");
    if (!(p.alpha != 0.0) || !std::isfinite(p.alpha)) throw Error(ErrorKind::input, "alpha must be finite and nonzero");
    if (!(p.omega > 0.0) || !std::isfinite(p.omega)) throw Error(ErrorKind::input, "omega must be positive");
    if (!std::isfinite(p.A) || !std::isfinite(p.B) || !std::isfinite(p.C1) || !std::isfinite(p.C2))
        throw Error(ErrorKind::input, "linear coefficients must be finite");
}

namespace detail {

// Every code path that needs τ^α or the oscillation basis goes through these,
// so grid search, refinement and evaluation agree to the last bit.
inline double power_term(double alpha, double log_tau) { return std::exp(alpha * log_tau); }
inline double phase(double omega, double log_tau) { return omega * log_tau; }

inline double evaluate_unchecked(const LpplParams& p, double t) {
    const double log_tau = std::log(p.tc - t);
    const double pw = power_term(p.alpha, log_tau);
    const double x = phase(p.omega, log_tau);
    return p.A + p.B * pw + pw * (p.C1 * std::cos(x) + p.C2 * std::sin(x));
}

}  // namespace detail

/// Model value at t, in the units of `p.scale`. Undefined (and an error) for t >= tc.
inline double evaluate(const LpplParams& p, double t) {
    if (!(t < p.tc))
        throw Error(ErrorKind::domain, "model evaluated at t = " + detail::format_double(t) +
                                           " >= tc = " + detail::format_double(p.tc));
    return detail::evaluate_unchecked(p, t);
}

/// The trend part A + B τ^α.
inline double trend(const LpplParams& p, double t) {
    if (!(t < p.tc)) throw Error(ErrorKind::domain, "trend evaluated at or beyond tc");
    return p.A + p.B * detail::power_term(p.alpha, std::log(p.tc - t));
}

/// Amplitude of the oscillation term, τ^α sqrt(C1² + C2²).
inline double envelope(const LpplParams& p, double t) {
    if (!(t < p.tc)) throw Error(ErrorKind::domain, "envelope evaluated at or beyond tc");
    return detail::power_term(p.alpha, std::log(p.tc - t)) * std::hypot(p.C1, p.C2);
}

inline LpplParams from_published(const PublishedParams& pp, Scale scale = Scale::raw) {
    LpplParams lp;
    lp.tc = pp.tc;
    lp.alpha = pp.alpha;
    lp.omega = pp.omega;
    lp.A = pp.A;
    lp.B = -pp.m;
    lp.C1 = -pp.m * pp.C * std::cos(pp.phi);
    lp.C2 = pp.m * pp.C * std::sin(pp.phi);
    lp.scale = scale;
    return lp;
}

/// Inverse of from_published, gauge-fixed to C >= 0 and φ in [0, 2π).
inline PublishedParams to_published(const LpplParams& lp) {
    if (lp.B == 0.0)
        throw Error(ErrorKind::degenerate_parameter, "B = 0: m and C are not separately identifiable");
    PublishedParams pp;
    pp.A = lp.A;
    pp.m = -lp.B;
    pp.alpha = lp.alpha;
    pp.omega = lp.omega;
    pp.tc = lp.tc;
    if (lp.C1 == 0.0 && lp.C2 == 0.0) return pp;  // C = 0, φ = 0
    // C cos φ = -C1 / m, C sin φ = C2 / m
    const double c_cos = -lp.C1 / pp.m;
    const double c_sin = lp.C2 / pp.m;
    pp.C = std::hypot(c_cos, c_sin);
    double phi = std::atan2(c_sin, c_cos);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    if (phi >= 2.0 * std::numbers::pi) phi = 0.0;
    pp.phi = phi;
    return pp;
}

inline std::vector<double> residuals(const LpplParams& p, const PriceSeries& s) {
    if (p.scale != s.scale())
        throw Error(ErrorKind::state, "parameter scale " + std::string(to_string(p.scale)) +
                                          " does not match series scale " + std::string(to_string(s.scale())));
    if (!(s.back_time() < p.tc)) throw Error(ErrorKind::domain, "series extends to or beyond tc");
    std::vector<double> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) r[i] = s.price(i) - detail::evaluate_unchecked(p, s.time(i));
    return r;
}

inline double sum_of_squares(const std::vector<double>& r) {
    double acc = 0.0;
    for (double x : r) acc += x * x;
    return acc;
}

inline double sse(const LpplParams& p, const PriceSeries& s) { return sum_of_squares(residuals(p, s)); }

}  // namespace lppl
