#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace lppl {

struct SimplexOptions {
    std::size_t max_iterations = 2000;
    /// Stop once (f_worst - f_best) <= rel_tol * |f_best| + abs_tol.
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    /// Stop once every vertex lies within x_tol (relative) of the best vertex.
    double x_tol = 1e-13;
};

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x{};
    double value = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/**
 * Nelder-Mead downhill simplex (reflection 1, expansion 2, contraction 1/2,
 * shrink 1/2). Every trial point is passed through `project` before it is
 * evaluated, which is how box constraints are imposed. The best vertex is only
 * replaced by a strictly better one, so the result never scores worse than x0.
 * Objective values may be +inf (infeasible); NaN is treated as +inf.
 */
template <std::size_t N, class Objective, class Project>
SimplexResult<N> nelder_mead(Objective&& f, const std::array<double, N>& x0, const std::array<double, N>& steps,
                             Project&& project, const SimplexOptions& opt) {
    using Point = std::array<double, N>;
    SimplexResult<N> res;
    auto eval = [&](const Point& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::array<Point, N + 1> pts;
    std::array<double, N + 1> vals;
    pts[0] = project(x0);
    vals[0] = eval(pts[0]);
    if (opt.max_iterations == 0) {
        res.x = pts[0];
        res.value = vals[0];
        return res;
    }
    for (std::size_t i = 0; i < N; ++i) {
        Point p = pts[0];
        p[i] += steps[i];
        p = project(p);
        if (p[i] == pts[0][i]) {  // pinned against a bound: step the other way
            p = pts[0];
            p[i] -= steps[i];
            p = project(p);
        }
        pts[i + 1] = p;
        vals[i + 1] = eval(pts[i + 1]);
    }

    std::array<std::size_t, N + 1> order;
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::array<Point, N + 1> p2;
        std::array<double, N + 1> v2;
        for (std::size_t i = 0; i <= N; ++i) {
            p2[i] = pts[order[i]];
            v2[i] = vals[order[i]];
        }
        pts = p2;
        vals = v2;
    };
    auto blend = [&](const Point& c, const Point& w, double coef) {
        Point out;
        for (std::size_t i = 0; i < N; ++i) out[i] = c[i] + coef * (w[i] - c[i]);
        return project(out);
    };
    auto collapsed = [&] {
        for (std::size_t v = 1; v <= N; ++v)
            for (std::size_t i = 0; i < N; ++i)
                if (std::abs(pts[v][i] - pts[0][i]) > opt.x_tol * (1.0 + std::abs(pts[0][i]))) return false;
        return true;
    };

    sort_vertices();
    while (true) {
        if (!std::isfinite(vals[0])) break;  // nowhere feasible to go
        if (std::isfinite(vals[N]) &&
            (vals[N] - vals[0] <= opt.rel_tol * std::abs(vals[0]) + opt.abs_tol || collapsed())) {
            res.converged = true;
            break;
        }
        if (res.iterations >= opt.max_iterations) break;
        ++res.iterations;

        Point centroid{};
        for (std::size_t v = 0; v < N; ++v)
            for (std::size_t i = 0; i < N; ++i) centroid[i] += pts[v][i] / static_cast<double>(N);

        const Point xr = blend(centroid, pts[N], -1.0);
        const double fr = eval(xr);
        if (fr < vals[0]) {
            const Point xe = blend(centroid, pts[N], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[N] = xe;
                vals[N] = fe;
            } else {
                pts[N] = xr;
                vals[N] = fr;
            }
        } else if (fr < vals[N - 1]) {
            pts[N] = xr;
            vals[N] = fr;
        } else {
            const bool outside = fr < vals[N];
            const Point xc = outside ? blend(centroid, pts[N], -0.5) : blend(centroid, pts[N], 0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, vals[N])) {
                pts[N] = xc;
                vals[N] = fc;
            } else {
                for (std::size_t v = 1; v <= N; ++v) {
                    pts[v] = blend(pts[0], pts[v], 0.5);
                    vals[v] = eval(pts[v]);
                }
            }
        }
        sort_vertices();
    }
    res.x = pts[0];
    res.value = vals[0];
    return res;
}

}  // namespace lppl
