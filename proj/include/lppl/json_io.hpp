#pragma once

/** @file
 * JSON documents for parameters, fits, scans and forecasts. Every top-level
 * document carries a `schema` string; keys keep insertion order.
 */

#include <nlohmann/json.hpp>

#include <string>

#include "lppl/error.hpp"
#include "lppl/fitting.hpp"
#include "lppl/forecast.hpp"
#include "lppl/model.hpp"
#include "lppl/timebase.hpp"
#include "lppl/windows.hpp"

namespace lppl {

using Json = nlohmann::ordered_json;

inline constexpr const char* kParamsSchema = "lppl.params/1";
inline constexpr const char* kFitSchema = "lppl.fit/1";
inline constexpr const char* kScanSchema = "lppl.scan/1";
inline constexpr const char* kForecastSchema = "lppl.forecast/1";

namespace detail {

inline Json time_json(double t) {
    Json j;
    j["decimal_year"] = t;
    j["date"] = to_iso(decimal_year_to_date(TimePoint(t)));
    return j;
}

template <class T>
T field(const Json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorKind::format, std::string("document lacks '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace detail

/// Both parameterisations side by side; `published` is null when B = 0.
inline Json params_to_json(const LpplParams& p) {
    Json j;
    j["schema"] = kParamsSchema;
    j["scale"] = to_string(p.scale);
    j["internal"] = {{"tc", p.tc}, {"alpha", p.alpha}, {"omega", p.omega}, {"A", p.A},
                     {"B", p.B},   {"C1", p.C1},       {"C2", p.C2}};
    if (p.B != 0.0) {
        const auto pp = to_published(p);
        j["published"] = {{"A", pp.A},         {"m", pp.m},         {"C", pp.C}, {"alpha", pp.alpha},
                      {"omega", pp.omega}, {"phi", pp.phi},     {"tc", pp.tc}};
    } else {
        j["published"] = nullptr;
    }
    j["gauge"] = "C >= 0, phi in [0, 2pi)";
    j["model"] = "p(t) = A + B*tau^alpha + tau^alpha*(C1*cos(omega*ln tau) + C2*sin(omega*ln tau)), tau = tc - t";
    return j;
}

/// Reads the internal basis; falls back to the published form if only that is present.
inline LpplParams params_from_json(const Json& j) {
    LpplParams p;
    p.scale = scale_from_string(detail::field<std::string>(j, "scale"));
    if (j.contains("internal") && !j["internal"].is_null()) {
        const auto& in = j["internal"];
        p.tc = detail::field<double>(in, "tc");
        p.alpha = detail::field<double>(in, "alpha");
        p.omega = detail::field<double>(in, "omega");
        p.A = detail::field<double>(in, "A");
        p.B = detail::field<double>(in, "B");
        p.C1 = detail::field<double>(in, "C1");
        p.C2 = detail::field<double>(in, "C2");
    } else if (j.contains("published") && !j["published"].is_null()) {
        const auto& pj = j["published"];
        const PublishedParams pp{detail::field<double>(pj, "A"),     detail::field<double>(pj, "m"),
                             detail::field<double>(pj, "C"),     detail::field<double>(pj, "alpha"),
                             detail::field<double>(pj, "omega"), detail::field<double>(pj, "phi"),
                             detail::field<double>(pj, "tc")};
        p = from_published(pp, p.scale);
    } else {
        throw Error(ErrorKind::format, "parameter document has neither 'internal' nor 'published' block");
    }
    validate(p);
    return p;
}

inline Json fit_to_json(const FitResult& r) {
    Json j;
    j["schema"] = kFitSchema;
    j["params"] = params_to_json(r.params);
    j["tc"] = detail::time_json(r.params.tc);
    j["sse"] = r.sse;
    j["rmse"] = r.rmse;
    j["n_points"] = r.n_points;
    j["window"] = {{"start", detail::time_json(r.window.start)}, {"end", detail::time_json(r.window.end)}};
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["candidates_evaluated"] = r.candidates_evaluated;
    return j;
}

inline FitResult fit_from_json(const Json& j) {
    if (detail::field<std::string>(j, "schema") != kFitSchema)
        throw Error(ErrorKind::format, "not a fit document (schema " + j["schema"].dump() + ")");
    FitResult r;
    r.params = params_from_json(j.at("params"));
    r.sse = detail::field<double>(j, "sse");
    r.rmse = detail::field<double>(j, "rmse");
    r.n_points = detail::field<std::size_t>(j, "n_points");
    r.window.start = detail::field<double>(j.at("window").at("start"), "decimal_year");
    r.window.end = detail::field<double>(j.at("window").at("end"), "decimal_year");
    r.converged = detail::field<bool>(j, "converged");
    r.iterations = detail::field<std::size_t>(j, "iterations");
    r.candidates_evaluated = detail::field<std::size_t>(j, "candidates_evaluated");
    return r;
}

inline Json scan_to_json(const ScanResult& s) {
    Json j;
    j["schema"] = kScanSchema;
    j["tc_median"] = s.successes ? detail::time_json(s.tc_median) : Json(nullptr);
    j["tc_iqr"] = s.tc_iqr;
    j["stable"] = s.stable;
    j["successes"] = s.successes;
    j["windows"] = s.entries.size();
    j["stability_criterion"] = {
        {"rule", "interquartile range of tc over successful windows <= threshold, with at least min_successes fits"},
        {"threshold_years", s.stability_threshold},
        {"min_successes", s.min_successes},
        {"note", "operational criterion defined by this toolkit"}};
    Json entries = Json::array();
    for (const auto& e : s.entries) {
        Json ej;
        ej["start"] = detail::time_json(e.start);
        ej["end"] = detail::time_json(e.end);
        if (e.fit) {
            ej["fit"] = fit_to_json(*e.fit);
        } else {
            ej["fit"] = nullptr;
            ej["failure"] = e.failure;
        }
        entries.push_back(std::move(ej));
    }
    j["entries"] = std::move(entries);
    return j;
}

inline Json forecast_to_json(const Forecast& f) {
    Json j;
    j["schema"] = kForecastSchema;
    j["tc"] = detail::time_json(f.source_fit.params.tc);
    j["tc_date"] = to_iso(f.tc_date);
    j["crash_window"] = {{"start", to_iso(f.window_start)}, {"end", to_iso(f.window_end)}};
    j["regime"] = to_string(f.regime);
    j["lead_time_years"] = kCrashLeadYears;
    j["lead_time_convention"] = kLeadConvention;
    j["source_fit"] = fit_to_json(f.source_fit);
    return j;
}

}  // namespace lppl
