#pragma once

/** @file
 * Separable least-squares estimation of the LPPL model.
 *
 * For a fixed nonlinear triple (tc, α, ω) the model is linear in
 * (A, B, C1, C2), so those four are solved exactly by a column-pivoted
 * Householder QR of the n×4 design [1, τ^α, τ^α cos(ω ln τ), τ^α sin(ω ln τ)].
 * The resulting profiled SSE is searched over a Cartesian grid of triples,
 * and the best `multistart_top_k` grid points are polished with a
 * Nelder-Mead simplex over the triple.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lppl/error.hpp"
#include "lppl/model.hpp"
#include "lppl/parallel.hpp"
#include "lppl/series.hpp"
#include "lppl/simplex.hpp"

namespace lppl {

/// |α| below this is never evaluated: τ^α degenerates into the constant column.
inline constexpr double kAlphaDeadZone = 0.05;

struct FitConfig {
    // tc grid, as offsets beyond the last observation. The grid starts one
    // sample interval past the window end (or tc_offset_min, if larger) and
    // steps by tc_step up to tc_offset_max.
    double tc_offset_min = 0.0;
    double tc_offset_max = 5.0;
    double tc_step = 0.05;

    double alpha_min = -3.0;
    double alpha_max = 1.0;
    double alpha_step = 0.05;
    double alpha_dead_zone = kAlphaDeadZone;

    double omega_min = 2.0;
    double omega_max = 30.0;
    double omega_step = 0.5;

    std::size_t min_points = kDefaultMinPoints;
    std::size_t refine_max_iters = 2000;
    /// Simplex stops when its SSE spread falls below refine_tol * SSE_best.
    double refine_tol = 1e-10;
    Scale scale = Scale::raw;
    std::size_t multistart_top_k = 10;
    /// Worker threads; 0 = hardware concurrency. Results do not depend on it.
    std::size_t threads = 1;

    friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

inline void validate(const FitConfig& c) {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorKind::config, what);
    };
    need(c.tc_offset_min >= 0.0 && c.tc_offset_max > c.tc_offset_min, "need 0 <= tc_offset_min < tc_offset_max");
    need(c.tc_step > 0.0, "tc_step must be positive");
    need(c.alpha_min <= c.alpha_max, "alpha_min must not exceed alpha_max");
    need(c.alpha_step > 0.0, "alpha_step must be positive");
    need(c.alpha_dead_zone >= kAlphaDeadZone, "alpha_dead_zone must be at least 0.05");
    need(c.omega_min > 0.0 && c.omega_min <= c.omega_max, "need 0 < omega_min <= omega_max");
    need(c.omega_step > 0.0, "omega_step must be positive");
    need(c.min_points >= 8, "min_points must be at least 8");
    need(c.refine_tol > 0.0, "refine_tol must be positive");
    need(c.multistart_top_k >= 1, "multistart_top_k must be at least 1");
}

struct LinearFit {
    double A = 0.0;
    double B = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

/// One point of the nonlinear search with its profiled linear solution.
struct Candidate {
    double tc = 0.0;
    double alpha = 0.0;
    double omega = 0.0;
    LinearFit linear;
};

struct Window {
    double start = 0.0;
    double end = 0.0;
};

struct FitResult {
    LpplParams params;
    double sse = 0.0;
    double rmse = 0.0;
    std::size_t n_points = 0;
    Window window;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t candidates_evaluated = 0;
};

/// Raised when no simplex trial point admits a non-degenerate design.
class RefinementFailed : public Error {
public:
    RefinementFailed(const std::string& what, Candidate best)
        : Error(ErrorKind::refinement_failed, what), best_(best) {}
    const Candidate& best() const noexcept { return best_; }

private:
    Candidate best_;
};

/// Grid ordering: SSE, then smaller tc, smaller ω, smaller |α|, smaller α.
inline bool candidate_less(const Candidate& a, const Candidate& b) {
    if (a.linear.sse != b.linear.sse) return a.linear.sse < b.linear.sse;
    if (a.tc != b.tc) return a.tc < b.tc;
    if (a.omega != b.omega) return a.omega < b.omega;
    if (std::abs(a.alpha) != std::abs(b.alpha)) return std::abs(a.alpha) < std::abs(b.alpha);
    return a.alpha < b.alpha;
}

inline LpplParams to_params(const Candidate& c, Scale scale) {
    return {c.tc, c.alpha, c.omega, c.linear.A, c.linear.B, c.linear.C1, c.linear.C2, scale};
}

namespace detail {

using Design = Eigen::Matrix<double, Eigen::Dynamic, 4>;

/// Reusable QR storage so the grid loop does not reallocate per candidate.
class LinearSolver {
public:
    explicit LinearSolver(std::size_t n) : design_(static_cast<Eigen::Index>(n), 4), qr_(static_cast<Eigen::Index>(n), 4) {}

    Design& design() { return design_; }

    std::optional<LinearFit> solve(const Eigen::Map<const Eigen::VectorXd>& y) {
        qr_.compute(design_);
        if (qr_.rank() < 4) return std::nullopt;
        const Eigen::Vector4d beta = qr_.solve(y);
        if (!beta.allFinite()) return std::nullopt;
        const double sse = (y - design_ * beta).squaredNorm();
        if (!std::isfinite(sse)) return std::nullopt;
        return LinearFit{beta[0], beta[1], beta[2], beta[3], sse};
    }

private:
    Design design_;
    Eigen::ColPivHouseholderQR<Design> qr_;
};

inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

inline std::optional<LinearFit> profile(LinearSolver& solver, std::span<const double> times,
                                        std::span<const double> prices, double tc, double alpha, double omega) {
    auto& X = solver.design();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double log_tau = std::log(tc - times[i]);
        const double pw = power_term(alpha, log_tau);
        const double x = phase(omega, log_tau);
        const auto r = static_cast<Eigen::Index>(i);
        X(r, 0) = 1.0;
        X(r, 1) = pw;
        X(r, 2) = pw * std::cos(x);
        X(r, 3) = pw * std::sin(x);
    }
    return solver.solve(as_vector(prices));
}

/// Values lo, lo + step, ... <= hi, computed without accumulating rounding.
inline std::vector<double> axis(double lo, double hi, double step) {
    std::vector<double> v;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) v.push_back(lo + static_cast<double>(i) * step);
    return v;
}

struct SearchBox {
    double tc_floor;  // exclusive
    double tc_max;
    double alpha_min, alpha_max, dead_zone;
    double omega_min, omega_max;
};

inline SearchBox search_box(const PriceSeries& s, const FitConfig& cfg) {
    const double end = s.back_time();
    return {end + std::max(s.sample_interval(), cfg.tc_offset_min),
            end + cfg.tc_offset_max,
            cfg.alpha_min,
            cfg.alpha_max,
            cfg.alpha_dead_zone,
            cfg.omega_min,
            cfg.omega_max};
}

}  // namespace detail

/// Exact least-squares (A, B, C1, C2) for a fixed (tc, α, ω).
inline LinearFit solve_linear(double tc, double alpha, double omega, const PriceSeries& s) {
    if (!(s.back_time() < tc)) throw Error(ErrorKind::domain, "series extends to or beyond tc");
    if (!(std::abs(alpha) >= kAlphaDeadZone))
        throw Error(ErrorKind::input, "|alpha| must be at least 0.05");
    if (!(omega > 0.0)) throw Error(ErrorKind::input, "omega must be positive");
    if (s.size() < 4) throw Error(ErrorKind::degenerate_design, "fewer than 4 observations for 4 coefficients");
    detail::LinearSolver solver(s.size());
    auto fit = detail::profile(solver, s.times(), s.prices(), tc, alpha, omega);
    if (!fit) throw Error(ErrorKind::degenerate_design, "design matrix is rank deficient");
    return *fit;
}

struct Grid {
    std::vector<double> tc;
    std::vector<double> alpha;
    std::vector<double> omega;

    std::size_t size() const noexcept { return tc.size() * alpha.size() * omega.size(); }
};

inline Grid make_grid(const PriceSeries& s, const FitConfig& cfg) {
    validate(cfg);
    const auto box = detail::search_box(s, cfg);
    Grid g;
    for (std::size_t k = 1;; ++k) {
        const double v = box.tc_floor + static_cast<double>(k) * cfg.tc_step;
        if (v > box.tc_max + 1e-9) break;
        g.tc.push_back(std::min(v, box.tc_max));
    }
    for (double a : detail::axis(cfg.alpha_min, cfg.alpha_max, cfg.alpha_step))
        if (std::abs(a) >= cfg.alpha_dead_zone * (1.0 - 1e-9)) g.alpha.push_back(a);
    g.omega = detail::axis(cfg.omega_min, cfg.omega_max, cfg.omega_step);
    return g;
}

/// Profiles every grid triple; returns the non-degenerate ones sorted best-first.
inline std::vector<Candidate> grid_search(const PriceSeries& s, const FitConfig& cfg) {
    validate(cfg);
    if (s.size() < cfg.min_points)
        throw Error(ErrorKind::config, "series has " + std::to_string(s.size()) + " points, min_points is " +
                                           std::to_string(cfg.min_points));
    const Grid grid = make_grid(s, cfg);
    if (grid.size() == 0) throw Error(ErrorKind::config, "search grid is empty");

    const auto times = s.times();
    const auto prices = detail::as_vector(s.prices());
    const std::size_t n = s.size();
    std::vector<std::vector<Candidate>> per_tc(grid.tc.size());

    parallel_for(grid.tc.size(), cfg.threads, [&](std::size_t ti) {
        const double tc = grid.tc[ti];
        std::vector<double> log_tau(n);
        for (std::size_t i = 0; i < n; ++i) log_tau[i] = std::log(tc - times[i]);
        // oscillation basis per ω, shared across α
        std::vector<double> cosines(grid.omega.size() * n), sines(grid.omega.size() * n);
        for (std::size_t k = 0; k < grid.omega.size(); ++k)
            for (std::size_t i = 0; i < n; ++i) {
                const double x = detail::phase(grid.omega[k], log_tau[i]);
                cosines[k * n + i] = std::cos(x);
                sines[k * n + i] = std::sin(x);
            }
        detail::LinearSolver solver(n);
        auto& X = solver.design();
        std::vector<double> pw(n);
        auto& out = per_tc[ti];
        out.reserve(grid.alpha.size() * grid.omega.size());
        for (double alpha : grid.alpha) {
            for (std::size_t i = 0; i < n; ++i) pw[i] = detail::power_term(alpha, log_tau[i]);
            for (std::size_t k = 0; k < grid.omega.size(); ++k) {
                for (std::size_t i = 0; i < n; ++i) {
                    const auto r = static_cast<Eigen::Index>(i);
                    X(r, 0) = 1.0;
                    X(r, 1) = pw[i];
                    X(r, 2) = pw[i] * cosines[k * n + i];
                    X(r, 3) = pw[i] * sines[k * n + i];
                }
                if (auto lin = solver.solve(prices)) out.push_back({tc, alpha, grid.omega[k], *lin});
            }
        }
    });

    std::vector<Candidate> all;
    all.reserve(grid.size());
    for (auto& v : per_tc) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end(), candidate_less);
    return all;
}

/// Simplex polish of one candidate over (tc, α, ω) with the linear part profiled.
inline FitResult refine_local(const Candidate& start, const PriceSeries& s, const FitConfig& cfg) {
    validate(cfg);
    const auto box = detail::search_box(s, cfg);
    const double tc_lo = std::nextafter(box.tc_floor, std::numeric_limits<double>::infinity());

    auto project = [&](std::array<double, 3> x) {
        x[0] = std::clamp(x[0], tc_lo, std::max(tc_lo, box.tc_max));
        x[1] = std::clamp(x[1], box.alpha_min, box.alpha_max);
        if (std::abs(x[1]) < box.dead_zone) x[1] = std::signbit(x[1]) ? -box.dead_zone : box.dead_zone;
        x[2] = std::clamp(x[2], box.omega_min, box.omega_max);
        return x;
    };

    detail::LinearSolver solver(s.size());
    auto objective = [&](const std::array<double, 3>& x) {
        auto lin = detail::profile(solver, s.times(), s.prices(), x[0], x[1], x[2]);
        return lin ? lin->sse : std::numeric_limits<double>::infinity();
    };

    double max_abs = 0.0;
    for (double p : s.prices()) max_abs = std::max(max_abs, std::abs(p));
    SimplexOptions opt;
    opt.max_iterations = cfg.refine_max_iters;
    opt.rel_tol = cfg.refine_tol;
    // residual floor of a few ulps per point: below it SSE differences are noise
    const double ulp_floor = 8.0 * std::numeric_limits<double>::epsilon() * max_abs;
    opt.abs_tol = static_cast<double>(s.size()) * ulp_floor * ulp_floor;

    const auto res = nelder_mead<3>(objective, {start.tc, start.alpha, start.omega},
                                    {cfg.tc_step, cfg.alpha_step, cfg.omega_step}, project, opt);
    if (!std::isfinite(res.value)) throw RefinementFailed("every simplex trial point was degenerate", start);

    // Rebuild the linear part at the returned vertex.
    auto lin = detail::profile(solver, s.times(), s.prices(), res.x[0], res.x[1], res.x[2]);
    if (!lin) throw RefinementFailed("degenerate design at simplex optimum", start);

    FitResult fr;
    fr.params = to_params({res.x[0], res.x[1], res.x[2], *lin}, s.scale());
    fr.sse = lin->sse;
    fr.rmse = std::sqrt(lin->sse / static_cast<double>(s.size()));
    fr.n_points = s.size();
    fr.window = {s.front_time(), s.back_time()};
    fr.converged = res.converged;
    fr.iterations = res.iterations;
    fr.candidates_evaluated = res.evaluations;
    return fr;
}

/// Grid search followed by simplex refinement of the best candidates.
inline FitResult fit(const PriceSeries& s, const FitConfig& cfg) {
    validate(cfg);
    if (s.scale() != cfg.scale)
        throw Error(ErrorKind::config, "series scale " + std::string(to_string(s.scale())) +
                                           " does not match configured scale " + std::string(to_string(cfg.scale)));
    const auto candidates = grid_search(s, cfg);
    const std::size_t grid_points = make_grid(s, cfg).size();
    if (candidates.empty()) throw Error(ErrorKind::fit_failed, "every grid point gave a degenerate design");

    const std::size_t k = std::min(cfg.multistart_top_k, candidates.size());
    std::vector<std::optional<FitResult>> refined(k);
    std::vector<std::string> failures(k);
    FitConfig inner = cfg;
    inner.threads = 1;
    parallel_for(k, cfg.threads, [&](std::size_t i) {
        try {
            refined[i] = refine_local(candidates[i], s, inner);
        } catch (const RefinementFailed& e) {
            failures[i] = e.what();
        }
    });

    std::optional<FitResult> best;
    std::size_t evaluations = grid_points;
    for (std::size_t i = 0; i < k; ++i) {
        if (!refined[i]) continue;
        evaluations += refined[i]->candidates_evaluated;
        const auto& r = *refined[i];
        if (!best) {
            best = r;
            continue;
        }
        const Candidate a{r.params.tc, r.params.alpha, r.params.omega, {0, 0, 0, 0, r.sse}};
        const Candidate b{best->params.tc, best->params.alpha, best->params.omega, {0, 0, 0, 0, best->sse}};
        if (candidate_less(a, b)) best = r;
    }
    if (!best) throw Error(ErrorKind::fit_failed, "all " + std::to_string(k) + " refinements failed: " + failures[0]);
    best->candidates_evaluated = evaluations;
    return *best;
}

}  // namespace lppl
