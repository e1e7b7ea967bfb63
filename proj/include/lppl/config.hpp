#pragma once

/** @file
 * Flat `key = value` configuration files.
 *
 *     # comment
 *     tc_offset_max = 5
 *     scale = raw
 *
 * Keys are unique; blank lines and `#` comments are ignored.
 */

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "lppl/detail/text.hpp"
#include "lppl/error.hpp"
#include "lppl/fitting.hpp"
#include "lppl/synth.hpp"
#include "lppl/timebase.hpp"

namespace lppl {

class KeyValues {
public:
    static KeyValues parse(std::istream& in) {
        KeyValues kv;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto body = detail::trim(std::string_view(line).substr(0, line.find('#')));
            if (body.empty()) continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos)
                throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key(detail::trim(body.substr(0, eq)));
            const std::string value(detail::trim(body.substr(eq + 1)));
            if (key.empty()) throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": empty key");
            if (!kv.values_.emplace(key, value).second)
                throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        return kv;
    }

    void write(std::ostream& out) const {
        for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    }

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    bool empty() const noexcept { return values_.empty(); }
    const std::map<std::string, std::string>& items() const noexcept { return values_; }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    void set(const std::string& key, double value) { values_[key] = detail::format_double(value); }
    void set(const std::string& key, std::size_t value) { values_[key] = std::to_string(value); }

    /// Removes and returns `key`, if present.
    std::optional<std::string> take(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        auto v = std::move(it->second);
        values_.erase(it);
        return v;
    }

    void take_into(const std::string& key, double& out) {
        if (auto v = take(key)) {
            auto d = detail::parse_double(*v);
            if (!d) throw Error(ErrorKind::config, "key '" + key + "': not a number: '" + *v + "'");
            out = *d;
        }
    }

    template <class Int>
    void take_into_int(const std::string& key, Int& out) {
        if (auto v = take(key)) {
            Int x{};
            auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
            if (ec != std::errc{} || ptr != v->data() + v->size())
                throw Error(ErrorKind::config, "key '" + key + "': not a non-negative integer: '" + *v + "'");
            out = x;
        }
    }

    /// Accepts a decimal year or an ISO date.
    void take_time_into(const std::string& key, double& out) {
        if (auto v = take(key)) {
            if (v->find('-') != std::string::npos && v->size() == 10) {
                out = date_to_decimal_year(parse_iso_date(*v)).value();
            } else {
                auto d = detail::parse_double(*v);
                if (!d) throw Error(ErrorKind::config, "key '" + key + "': not a time: '" + *v + "'");
                out = *d;
            }
        }
    }

    /// Throws if any key has not been consumed.
    void expect_consumed(std::string_view what) const {
        if (values_.empty()) return;
        std::string keys;
        for (const auto& [k, v] : values_) keys += (keys.empty() ? "" : ", ") + k;
        throw Error(ErrorKind::config, "unknown " + std::string(what) + " key(s): " + keys);
    }

private:
    std::map<std::string, std::string> values_;
};

/// Reads every FitConfig key present in `kv` (consuming it) on top of `base`.
inline FitConfig take_fit_config(KeyValues& kv, FitConfig base = {}) {
    kv.take_into("tc_offset_min", base.tc_offset_min);
    kv.take_into("tc_offset_max", base.tc_offset_max);
    kv.take_into("tc_step", base.tc_step);
    kv.take_into("alpha_min", base.alpha_min);
    kv.take_into("alpha_max", base.alpha_max);
    kv.take_into("alpha_step", base.alpha_step);
    kv.take_into("alpha_dead_zone", base.alpha_dead_zone);
    kv.take_into("omega_min", base.omega_min);
    kv.take_into("omega_max", base.omega_max);
    kv.take_into("omega_step", base.omega_step);
    kv.take_into_int("min_points", base.min_points);
    kv.take_into_int("refine_max_iters", base.refine_max_iters);
    kv.take_into("refine_tol", base.refine_tol);
    if (auto v = kv.take("scale")) base.scale = scale_from_string(*v);
    kv.take_into_int("multistart_top_k", base.multistart_top_k);
    kv.take_into_int("threads", base.threads);
    return base;
}

inline void put(KeyValues& kv, const FitConfig& c) {
    kv.set("tc_offset_min", c.tc_offset_min);
    kv.set("tc_offset_max", c.tc_offset_max);
    kv.set("tc_step", c.tc_step);
    kv.set("alpha_min", c.alpha_min);
    kv.set("alpha_max", c.alpha_max);
    kv.set("alpha_step", c.alpha_step);
    kv.set("alpha_dead_zone", c.alpha_dead_zone);
    kv.set("omega_min", c.omega_min);
    kv.set("omega_max", c.omega_max);
    kv.set("omega_step", c.omega_step);
    kv.set("min_points", c.min_points);
    kv.set("refine_max_iters", c.refine_max_iters);
    kv.set("refine_tol", c.refine_tol);
    kv.set("scale", std::string(to_string(c.scale)));
    kv.set("multistart_top_k", c.multistart_top_k);
    kv.set("threads", c.threads);
}

/**
 * Synthesis spec keys. Parameters are given either in the internal basis
 * (tc alpha omega A B C1 C2) or in the published form (tc alpha omega A m C phi).
 */
inline SynthSpec take_synth_spec(KeyValues& kv, SynthSpec base = {}) {
    auto& p = base.params;
    kv.take_into("tc", p.tc);
    kv.take_into("alpha", p.alpha);
    kv.take_into("omega", p.omega);
    kv.take_into("A", p.A);
    if (auto v = kv.take("scale")) p.scale = scale_from_string(*v);
    const bool published_keys = kv.contains("m") || kv.contains("C") || kv.contains("phi");
    const bool internal = kv.contains("B") || kv.contains("C1") || kv.contains("C2");
    if (published_keys && internal) throw Error(ErrorKind::config, "mix of published-form (m C phi) and internal (B C1 C2) keys");
    if (published_keys) {
        PublishedParams pp{p.A, 0.0, 0.0, p.alpha, p.omega, 0.0, p.tc};
        kv.take_into("m", pp.m);
        kv.take_into("C", pp.C);
        kv.take_into("phi", pp.phi);
        p = from_published(pp, p.scale);
    } else {
        kv.take_into("B", p.B);
        kv.take_into("C1", p.C1);
        kv.take_into("C2", p.C2);
    }
    kv.take_time_into("t_start", base.t_start);
    kv.take_time_into("t_end", base.t_end);
    kv.take_into_int("n_points", base.n_points);
    if (auto v = kv.take("spacing")) base.spacing = spacing_from_string(*v);
    kv.take_into("noise_sigma", base.noise_sigma);
    kv.take_into_int("seed", base.seed);
    return base;
}

inline void put(KeyValues& kv, const SynthSpec& s) {
    kv.set("tc", s.params.tc);
    kv.set("alpha", s.params.alpha);
    kv.set("omega", s.params.omega);
    kv.set("A", s.params.A);
    kv.set("B", s.params.B);
    kv.set("C1", s.params.C1);
    kv.set("C2", s.params.C2);
    kv.set("scale", std::string(to_string(s.params.scale)));
    kv.set("t_start", s.t_start);
    kv.set("t_end", s.t_end);
    kv.set("n_points", s.n_points);
    kv.set("spacing", std::string(to_string(s.spacing)));
    kv.set("noise_sigma", s.noise_sigma);
    kv.set("seed", std::to_string(s.seed));
}

}  // namespace lppl
