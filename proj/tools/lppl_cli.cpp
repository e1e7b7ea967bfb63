// lppl: command-line front end (fit, scan, forecast, synth, eval).

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "lppl/lppl.hpp"

#ifndef LPPL_VERSION
#define LPPL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using lppl::Error;
using lppl::ErrorKind;
using lppl::Json;

namespace {

constexpr const char* kManifestSchema = "lppl.manifest/1";
constexpr std::size_t kCurvePoints = 1000;

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::input:
        case ErrorKind::format:
        case ErrorKind::validation:
        case ErrorKind::domain:
        case ErrorKind::state: return 1;
        case ErrorKind::config:
        case ErrorKind::empty_window:
        case ErrorKind::degenerate_parameter:
        case ErrorKind::generation: return 2;
        default: return 3;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::input, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::state, "SHA-256 digest failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return out.str();
}

double parse_time(const std::string& text, const std::string& what) {
    if (text.size() == 10 && text[4] == '-') return lppl::date_to_decimal_year(lppl::parse_iso_date(text)).value();
    const auto d = lppl::detail::parse_double(text);
    if (!d) throw Error(ErrorKind::config, what + ": not an ISO date or decimal year: '" + text + "'");
    return lppl::TimePoint(*d).value();
}

std::string iso_of(double t) { return lppl::to_iso(lppl::decimal_year_to_date(lppl::TimePoint(t))); }

// Collects outputs so that nothing is written until the command has succeeded.
class Outputs {
public:
    void add(std::string path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

    void commit(const std::string& manifest_path, Json manifest) {
        Json outs = Json::array();
        for (const auto& [path, content] : files_) {
            write_atomic(path, content);
            outs.push_back({{"path", path}, {"sha256", sha256_hex(content)}});
        }
        manifest["outputs"] = std::move(outs);
        if (!manifest_path.empty()) write_atomic(manifest_path, manifest.dump(2) + "\n");
    }

private:
    static void write_atomic(const std::string& path, const std::string& content) {
        const fs::path target(path);
        if (target.has_parent_path()) fs::create_directories(target.parent_path());
        const fs::path tmp = target.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorKind::input, "cannot write '" + tmp.string() + "'");
            out << content;
            if (!out.flush()) throw Error(ErrorKind::input, "short write to '" + tmp.string() + "'");
        }
        fs::rename(tmp, target);
    }

    std::vector<std::pair<std::string, std::string>> files_;
};

// "<dir>/<stem>.json" -> "<dir>/<stem><suffix>"
std::string sibling(const std::string& out, const std::string& suffix) {
    fs::path p(out);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

Json config_json(const lppl::KeyValues& kv) {
    Json j = Json::object();
    for (const auto& [k, v] : kv.items()) j[k] = v;
    return j;
}

// Config file: "key = value" text, or a manifest whose resolved config is replayed.
lppl::KeyValues load_config(const std::string& path) {
    if (path.empty()) return {};
    const auto text = read_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::config, "'" + path + "': " + e.what());
        }
        if (!j.contains("config") || !j["config"].is_object())
            throw Error(ErrorKind::config, "'" + path + "' is JSON but has no 'config' object");
        lppl::KeyValues kv;
        for (const auto& [k, v] : j["config"].items()) {
            if (!v.is_string()) throw Error(ErrorKind::config, "manifest config value for '" + k + "' is not a string");
            kv.set(k, v.get<std::string>());
        }
        return kv;
    }
    std::istringstream in(text);
    return lppl::KeyValues::parse(in);
}

Json manifest_base(const std::string& command, const lppl::KeyValues& resolved) {
    Json m;
    m["schema"] = kManifestSchema;
    m["tool"] = "lppl";
    m["version"] = LPPL_VERSION;
    m["command"] = command;
    m["config"] = config_json(resolved);
    m["inputs"] = Json::array();
    return m;
}

void add_input(Json& manifest, const std::string& path, const std::string& content) {
    manifest["inputs"].push_back({{"path", path}, {"sha256", sha256_hex(content)}});
}

void emit_document(Outputs& outs, const std::string& out, const Json& doc) {
    const auto text = doc.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        outs.add(out, text);
}

std::string column_choice(const std::string& text, const std::string& requested) {
    if (requested != "auto") return requested;
    const auto header = text.substr(0, text.find('\n'));
    for (auto f : lppl::detail::split(header, ',')) {
        auto name = std::string(lppl::detail::trim(f));
        if (name.starts_with("\xEF\xBB\xBF")) name.erase(0, 3);
        if (name == "Close") return "close";
    }
    return "price";
}

lppl::PriceSeries load_series(const std::string& text, const std::string& column, const std::string& label) {
    std::istringstream in(text);
    return lppl::parse_csv(in, lppl::price_column_from_string(column), label);
}

// --- shared fit options -----------------------------------------------------

struct FitArgs {
    std::string in, out, config, column, scale, window_start, window_end;
    std::optional<std::size_t> threads;
};

void add_fit_flags(CLI::App* cmd, FitArgs& a) {
    cmd->add_option("--in", a.in, "price CSV (Date plus Close / Adj Close / Price column)")->required();
    cmd->add_option("--out", a.out, "result document path (default: stdout, no side files)");
    cmd->add_option("--config", a.config, "key = value config file, or a manifest to replay");
    cmd->add_option("--column", a.column, "close | adjclose | price | auto");
    cmd->add_option("--scale", a.scale, "raw | log");
    cmd->add_option("--threads", a.threads, "worker threads, 0 = all cores");
}

// Flags override the config file, which overrides defaults.
void apply_fit_flags(lppl::KeyValues& kv, const FitArgs& a) {
    if (!a.column.empty()) kv.set("column", a.column);
    if (!a.scale.empty()) kv.set("scale", a.scale);
    if (a.threads) kv.set("threads", *a.threads);
    if (!a.window_start.empty()) kv.set("window_start", a.window_start);
    if (!a.window_end.empty()) kv.set("window_end", a.window_end);
}

struct Prepared {
    lppl::PriceSeries series;
    lppl::FitConfig cfg;
    lppl::KeyValues resolved;
    std::string input_text;
};

// Parses the input and the fit-related keys; leaves command-specific keys in `kv`.
Prepared prepare(lppl::KeyValues& kv, const FitArgs& a, bool use_window) {
    const auto column = kv.take("column").value_or("auto");
    std::optional<std::string> ws, we;
    if (use_window) {
        ws = kv.take("window_start");
        we = kv.take("window_end");
    }
    auto cfg = lppl::take_fit_config(kv);
    lppl::validate(cfg);

    auto text = read_file(a.in);
    const auto chosen = column_choice(text, column);
    auto s = load_series(text, chosen, fs::path(a.in).filename().string());

    lppl::KeyValues resolved;
    lppl::put(resolved, cfg);
    resolved.set("column", chosen);
    if (ws || we) {
        const double start = ws ? parse_time(*ws, "window_start") : s.front_time();
        const double end = we ? parse_time(*we, "window_end") : s.back_time();
        s = lppl::slice_window(s, lppl::TimePoint(start), lppl::TimePoint(end), cfg.min_points);
        if (ws) resolved.set("window_start", *ws);
        if (we) resolved.set("window_end", *we);
    }
    if (cfg.scale == lppl::Scale::log) s = lppl::log_transform(s);
    return {std::move(s), cfg, std::move(resolved), std::move(text)};
}

std::string residual_csv(const lppl::FitResult& r, const lppl::PriceSeries& s) {
    const auto res = lppl::residuals(r.params, s);
    std::string out = "Date,t,price,model,residual\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += iso_of(s.time(i)) + "," + lppl::detail::format_double(s.time(i)) + "," +
               lppl::detail::format_double(s.price(i)) + "," +
               lppl::detail::format_double(s.price(i) - res[i]) + "," + lppl::detail::format_double(res[i]) + "\n";
    }
    return out;
}

std::string curve_csv(const lppl::LpplParams& p, double t0, double t1, std::size_t n) {
    std::string out = "t,date,model,trend\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
        out += lppl::detail::format_double(t) + "," + iso_of(t) + "," +
               lppl::detail::format_double(lppl::evaluate(p, t)) + "," +
               lppl::detail::format_double(lppl::trend(p, t)) + "\n";
    }
    return out;
}

// --- commands ---------------------------------------------------------------

int cmd_fit(const FitArgs& a) {
    auto kv = load_config(a.config);
    apply_fit_flags(kv, a);
    auto prep = prepare(kv, a, true);
    kv.expect_consumed("fit config");

    const auto r = lppl::fit(prep.series, prep.cfg);
    Outputs outs;
    emit_document(outs, a.out, lppl::fit_to_json(r));
    if (a.out.empty()) return 0;
    outs.add(sibling(a.out, ".residuals.csv"), residual_csv(r, prep.series));
    outs.add(sibling(a.out, ".curve.csv"), curve_csv(r.params, r.window.start, r.window.end, kCurvePoints));
    auto m = manifest_base("fit", prep.resolved);
    add_input(m, a.in, prep.input_text);
    outs.commit(sibling(a.out, ".manifest.json"), std::move(m));
    return 0;
}

struct ScanArgs {
    FitArgs fit;
    std::vector<std::string> starts;
    std::string end;
    std::optional<double> threshold;
    std::optional<std::size_t> min_successes;
};

int cmd_scan(const ScanArgs& a) {
    auto kv = load_config(a.fit.config);
    apply_fit_flags(kv, a.fit);
    if (!a.starts.empty()) {
        std::string joined;
        for (const auto& s : a.starts) joined += (joined.empty() ? "" : ",") + s;
        kv.set("starts", joined);
    }
    if (!a.end.empty()) kv.set("end", a.end);
    if (a.threshold) kv.set("threshold", *a.threshold);
    if (a.min_successes) kv.set("min_successes", *a.min_successes);

    const auto starts_text = kv.take("starts");
    const auto end_text = kv.take("end");
    double threshold = lppl::kDefaultStabilityThreshold;
    std::size_t min_successes = lppl::kDefaultMinSuccesses;
    kv.take_into("threshold", threshold);
    kv.take_into_int("min_successes", min_successes);
    auto prep = prepare(kv, a.fit, false);
    kv.expect_consumed("scan config");
    if (!starts_text) throw Error(ErrorKind::config, "scan needs --starts (or 'starts' in the config)");

    std::vector<lppl::TimePoint> starts;
    for (auto f : lppl::detail::split(*starts_text, ','))
        starts.emplace_back(parse_time(std::string(lppl::detail::trim(f)), "starts"));
    const double end = end_text ? parse_time(*end_text, "end") : prep.series.back_time();

    prep.resolved.set("starts", *starts_text);
    if (end_text) prep.resolved.set("end", *end_text);
    prep.resolved.set("threshold", threshold);
    prep.resolved.set("min_successes", min_successes);

    lppl::ScanResult r;
    try {
        r = lppl::scan_windows(prep.series, starts, lppl::TimePoint(end), prep.cfg, threshold, min_successes);
    } catch (const lppl::ScanFailed& e) {
        for (const auto& en : e.entries())
            std::cerr << "window " << iso_of(en.start) << " .. " << iso_of(en.end) << ": " << en.failure << "\n";
        throw;
    }

    Outputs outs;
    emit_document(outs, a.fit.out, lppl::scan_to_json(r));
    if (a.fit.out.empty()) return 0;
    std::string csv = "start,end,tc,tc_date,alpha,omega,sse,rmse,n_points,converged,failure\n";
    for (const auto& e : r.entries) {
        csv += iso_of(e.start) + "," + iso_of(e.end) + ",";
        if (e.fit) {
            const auto& f = *e.fit;
            csv += lppl::detail::format_double(f.params.tc) + "," + iso_of(f.params.tc) + "," +
                   lppl::detail::format_double(f.params.alpha) + "," + lppl::detail::format_double(f.params.omega) +
                   "," + lppl::detail::format_double(f.sse) + "," + lppl::detail::format_double(f.rmse) + "," +
                   std::to_string(f.n_points) + "," + (f.converged ? "true" : "false") + ",\n";
        } else {
            std::string why = e.failure;
            std::replace(why.begin(), why.end(), ',', ';');
            std::replace(why.begin(), why.end(), '"', '\'');
            csv += ",,,,,,,," + why + "\n";
        }
    }
    outs.add(sibling(a.fit.out, ".windows.csv"), csv);
    auto m = manifest_base("scan", prep.resolved);
    add_input(m, a.fit.in, prep.input_text);
    outs.commit(sibling(a.fit.out, ".manifest.json"), std::move(m));
    return 0;
}

Json parse_json_file(const std::string& path, std::string& text) {
    text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, "'" + path + "': " + e.what());
    }
}

int cmd_forecast(const std::string& in, const std::string& out) {
    std::string text;
    const auto doc = parse_json_file(in, text);
    const auto f = lppl::crash_window(lppl::fit_from_json(doc));
    const auto summary = lppl::summary(f);
    Outputs outs;
    emit_document(outs, out, lppl::forecast_to_json(f));
    (out.empty() ? std::cerr : std::cout) << summary << "\n";
    if (out.empty()) return 0;
    outs.add(sibling(out, ".summary.txt"), summary + "\n");
    lppl::KeyValues none;
    auto m = manifest_base("forecast", none);
    add_input(m, in, text);
    outs.commit(sibling(out, ".manifest.json"), std::move(m));
    return 0;
}

struct SynthArgs {
    std::string config, out, scale;
    std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
    auto kv = load_config(a.config);
    if (a.seed) kv.set("seed", std::to_string(*a.seed));
    if (!a.scale.empty()) kv.set("scale", a.scale);
    const auto spec = lppl::take_synth_spec(kv);
    kv.expect_consumed("synth spec");
    auto s = lppl::generate(spec);
    // CSV files always hold prices; a log-scale model is exponentiated on the way out.
    if (s.scale() == lppl::Scale::log) {
        std::vector<double> prices(s.prices().begin(), s.prices().end());
        for (double& p : prices) p = std::exp(p);
        s = lppl::PriceSeries(std::vector<double>(s.times().begin(), s.times().end()), prices, lppl::Scale::raw,
                              s.label());
    }
    std::ostringstream csv;
    lppl::write_csv(csv, s);
    lppl::KeyValues resolved;
    lppl::put(resolved, spec);
    Outputs outs;
    if (a.out.empty()) {
        std::cout << csv.str();
        return 0;
    }
    outs.add(a.out, csv.str());
    auto m = manifest_base("synth", resolved);
    if (!a.config.empty()) add_input(m, a.config, read_file(a.config));
    outs.commit(sibling(a.out, ".manifest.json"), std::move(m));
    return 0;
}

struct EvalArgs {
    std::string in, out, start, end;
    std::size_t points = kCurvePoints;
};

int cmd_eval(const EvalArgs& a) {
    std::string text;
    const auto doc = parse_json_file(a.in, text);
    const auto schema = doc.value("schema", std::string{});
    lppl::LpplParams p;
    std::optional<lppl::FitResult> fr;
    if (schema == lppl::kFitSchema) {
        fr = lppl::fit_from_json(doc);
        p = fr->params;
    } else if (schema == lppl::kParamsSchema) {
        p = lppl::params_from_json(doc);
    } else {
        throw Error(ErrorKind::format, "'" + a.in + "' is neither a params nor a fit document");
    }
    if (a.points < 2) throw Error(ErrorKind::config, "--points must be at least 2");
    double t0, t1;
    if (!a.start.empty()) {
        t0 = parse_time(a.start, "--start");
    } else if (fr) {
        t0 = fr->window.start;
    } else {
        throw Error(ErrorKind::config, "--start is required for a bare parameter document");
    }
    if (!a.end.empty()) {
        t1 = parse_time(a.end, "--end");
    } else if (fr) {
        t1 = fr->window.end;
    } else {
        throw Error(ErrorKind::config, "--end is required for a bare parameter document");
    }
    if (!(t0 < t1)) throw Error(ErrorKind::config, "--start must precede --end");
    if (!(t1 < p.tc)) throw Error(ErrorKind::domain, "evaluation grid reaches tc = " + lppl::detail::format_double(p.tc));
    const auto csv = curve_csv(p, t0, t1, a.points);
    if (a.out.empty()) {
        std::cout << csv;
        return 0;
    }
    Outputs outs;
    outs.add(a.out, csv);
    lppl::KeyValues resolved;
    resolved.set("start", lppl::detail::format_double(t0));
    resolved.set("end", lppl::detail::format_double(t1));
    resolved.set("points", a.points);
    auto m = manifest_base("eval", resolved);
    add_input(m, a.in, text);
    outs.commit(sibling(a.out, ".manifest.json"), std::move(m));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Log-periodic power-law fitting toolkit"};
    app.set_version_flag("--version", std::string("lppl ") + LPPL_VERSION);
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit one window of a price series");
    add_fit_flags(fit_cmd, fit_args);
    fit_cmd->add_option("--window-start", fit_args.window_start, "first date of the window (YYYY-MM-DD)");
    fit_cmd->add_option("--window-end", fit_args.window_end, "last date of the window (YYYY-MM-DD)");

    ScanArgs scan_args;
    auto* scan_cmd = app.add_subcommand("scan", "fit a family of windows sharing one end date");
    add_fit_flags(scan_cmd, scan_args.fit);
    scan_cmd->add_option("--starts", scan_args.starts, "window start dates")->delimiter(',');
    scan_cmd->add_option("--end", scan_args.end, "common end date (default: last observation)");
    scan_cmd->add_option("--threshold", scan_args.threshold, "tc IQR stability threshold in years");
    scan_cmd->add_option("--min-successes", scan_args.min_successes, "fits required for stability");

    std::string fc_in, fc_out;
    auto* fc_cmd = app.add_subcommand("forecast", "crash window from a fit document");
    fc_cmd->add_option("--in", fc_in, "fit document")->required();
    fc_cmd->add_option("--out", fc_out, "forecast document path (default: stdout)");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic series from a spec");
    synth_cmd->add_option("--config", synth_args.config, "synthesis spec (key = value)")->required();
    synth_cmd->add_option("--out", synth_args.out, "CSV path (default: stdout)");
    synth_cmd->add_option("--seed", synth_args.seed, "noise seed");
    synth_cmd->add_option("--scale", synth_args.scale, "raw | log");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a params or fit document on a time grid");
    eval_cmd->add_option("--in", eval_args.in, "params or fit document")->required();
    eval_cmd->add_option("--out", eval_args.out, "CSV path (default: stdout)");
    eval_cmd->add_option("--start", eval_args.start, "grid start (date or decimal year)");
    eval_cmd->add_option("--end", eval_args.end, "grid end (date or decimal year)");
    eval_cmd->add_option("--points", eval_args.points, "grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit_args);
        if (*scan_cmd) return cmd_scan(scan_args);
        if (*fc_cmd) return cmd_forecast(fc_in, fc_out);
        if (*synth_cmd) return cmd_synth(synth_args);
        if (*eval_cmd) return cmd_eval(eval_args);
    } catch (const Error& e) {
        std::cerr << "lppl: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "lppl: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
