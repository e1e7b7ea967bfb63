#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lppl/fitting.hpp"
#include "lppl/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/published.hpp"

using lppl::FitConfig;
using lppl::PriceSeries;

using fixture::fig8_weekly;
using fixture::narrow_config;

TEST_CASE("solve_linear recovers the generating coefficients") {
    const auto truth = published::fig8();
    const auto s = lppl::generate(fig8_weekly());
    const auto lin = lppl::solve_linear(truth.tc, truth.alpha, truth.omega, s);
    CHECK(lin.A == Catch::Approx(truth.A).epsilon(1e-8));
    CHECK(lin.B == Catch::Approx(truth.B).epsilon(1e-8));
    CHECK(lin.C1 == Catch::Approx(truth.C1).epsilon(1e-8));
    CHECK(lin.C2 == Catch::Approx(truth.C2).epsilon(1e-8));
    CHECK(lin.sse < 1e-12);
}

TEST_CASE("solve_linear agrees with a long-double normal-equations solve") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> t, y;
        for (int i = 0; i < 60; ++i) {
            t.push_back(2000.0 + i * 0.05);
            y.push_back(100.0 + 20.0 * u(rng));
        }
        const PriceSeries s(t, y);
        const double tc = s.back_time() + 0.1 + 3.0 * u(rng);
        const double alpha = 0.2 + 0.7 * u(rng);
        const double omega = 3.0 + 10.0 * u(rng);
        const auto lin = lppl::solve_linear(tc, alpha, omega, s);
        const auto ne = oracle::normal_equations(t, y, tc, alpha, omega);
        REQUIRE(ne.has_value());
        // compare fitted values rather than raw coefficients (the latter inherit the design's conditioning)
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double tau = tc - t[i];
            const double pw = std::pow(tau, alpha);
            const double x = omega * std::log(tau);
            const double a = lin.A + lin.B * pw + pw * (lin.C1 * std::cos(x) + lin.C2 * std::sin(x));
            const long double b = (*ne)[0] + (*ne)[1] * pw + pw * ((*ne)[2] * std::cos(x) + (*ne)[3] * std::sin(x));
            REQUIRE(a == Catch::Approx(static_cast<double>(b)).epsilon(1e-6));
        }
    }
}

TEST_CASE("solve_linear: constant series") {
    std::vector<double> t, y;
    for (int i = 0; i < 30; ++i) {
        t.push_back(2000.0 + i * 0.1);
        y.push_back(5.0);
    }
    const auto lin = lppl::solve_linear(2004.0, 0.5, 6.0, PriceSeries(t, y));
    CHECK(lin.A == Catch::Approx(5.0).epsilon(1e-10));
    CHECK(std::abs(lin.B) < 1e-9);
    CHECK(std::abs(lin.C1) < 1e-9);
    CHECK(std::abs(lin.C2) < 1e-9);
    CHECK(lin.sse < 1e-20);
}

TEST_CASE("solve_linear: degenerate designs") {
    auto expect_degenerate = [](auto&& f) {
        try {
            f();
            FAIL("expected degenerate-design error");
        } catch (const lppl::Error& e) {
            CHECK(e.kind() == lppl::ErrorKind::degenerate_design);
        }
    };
    expect_degenerate([] { lppl::solve_linear(2010.0, 0.5, 5.0, PriceSeries({2000.0, 2001.0, 2002.0}, {1, 2, 3})); });
    expect_degenerate([] { lppl::solve_linear(2010.0, 0.5, 5.0, PriceSeries({2000.0, 2001.0}, {1, 2})); });
    CHECK_THROWS_AS(lppl::solve_linear(2001.5, 0.5, 5.0, PriceSeries({2000.0, 2001.0, 2002.0, 2003.0}, {1, 2, 3, 4})),
                    lppl::Error);
    CHECK_THROWS_AS(lppl::solve_linear(2010.0, 0.01, 5.0, PriceSeries({2000.0, 2001.0, 2002.0, 2003.0}, {1, 2, 3, 4})),
                    lppl::Error);
}

TEST_CASE("profile exactness: perturbing the linear coefficients never lowers SSE") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> t, y;
        const int n = 20 + static_cast<int>(u(rng) * 100);
        double time = 2000.0;
        for (int i = 0; i < n; ++i) {
            time += 0.005 + 0.05 * u(rng);
            t.push_back(time);
            y.push_back(50.0 + 100.0 * u(rng));
        }
        const PriceSeries s(t, y);
        const double tc = s.back_time() + 0.02 + 4.0 * u(rng);
        const double alpha = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.05 + 0.95 * u(rng));
        const double omega = 2.0 + 28.0 * u(rng);
        const auto lin = lppl::solve_linear(tc, alpha, omega, s);
        const lppl::LpplParams base{tc, alpha, omega, lin.A, lin.B, lin.C1, lin.C2};
        const double sse0 = lppl::sse(base, s);
        for (int coef = 0; coef < 4; ++coef)
            for (double sign : {-1.0, 1.0}) {
                auto p = base;
                double* c[] = {&p.A, &p.B, &p.C1, &p.C2};
                *c[coef] *= 1.0 + sign * 1e-3;
                REQUIRE(lppl::sse(p, s) >= sse0);
                ++checked;
            }
    }
    CHECK(checked == 1600);
}

TEST_CASE("grid_search ranks the true triple first on noiseless data") {
    const auto truth = published::fig8();
    lppl::SynthSpec spec = fig8_weekly();
    const auto s = lppl::generate(spec);
    // grid steps chosen so the truth sits exactly on a node
    FitConfig cfg;
    cfg.tc_offset_min = truth.tc - s.back_time() - 0.3;
    cfg.tc_offset_max = cfg.tc_offset_min + 0.6;
    cfg.tc_step = 0.1;
    cfg.alpha_min = 0.75;
    cfg.alpha_max = 1.0;
    cfg.alpha_step = 0.1;
    cfg.omega_min = 14.928 - 1.0;
    cfg.omega_max = 14.928 + 1.0;
    cfg.omega_step = 0.5;
    const auto grid = lppl::make_grid(s, cfg);
    const auto cands = lppl::grid_search(s, cfg);
    REQUIRE(cands.size() == grid.size());
    CHECK(cands.front().tc == Catch::Approx(truth.tc).margin(1e-9));
    CHECK(cands.front().alpha == Catch::Approx(0.95).margin(1e-9));
    CHECK(cands.front().omega == Catch::Approx(14.928).margin(1e-9));
    CHECK(cands.front().linear.sse < 1e-12);
    for (std::size_t i = 1; i < cands.size(); ++i) REQUIRE(!lppl::candidate_less(cands[i], cands[i - 1]));
}

TEST_CASE("grid_search: single-point grid and tie-break") {
    const auto s = lppl::generate(fig8_weekly());
    FitConfig cfg;
    cfg.tc_offset_min = 1.0;
    cfg.tc_offset_max = 1.05;
    cfg.tc_step = 0.05;
    cfg.alpha_min = cfg.alpha_max = 0.9;
    cfg.omega_min = cfg.omega_max = 15.0;
    const auto cands = lppl::grid_search(s, cfg);
    CHECK(cands.size() == 1);

    lppl::Candidate a{2017.0, 0.5, 10.0, {0, 0, 0, 0, 1.0}};
    lppl::Candidate b{2018.0, 0.5, 10.0, {0, 0, 0, 0, 1.0}};
    CHECK(lppl::candidate_less(a, b));
    CHECK(!lppl::candidate_less(b, a));
    lppl::Candidate c{2017.0, 0.5, 9.0, {0, 0, 0, 0, 1.0}};
    CHECK(lppl::candidate_less(c, a));
    lppl::Candidate d{2017.0, -0.4, 10.0, {0, 0, 0, 0, 1.0}};
    CHECK(lppl::candidate_less(d, a));
}

TEST_CASE("grid_search: config errors") {
    const auto s = lppl::generate(fig8_weekly());
    FitConfig empty;
    empty.alpha_min = -0.04;
    empty.alpha_max = 0.04;
    try {
        lppl::grid_search(s, empty);
        FAIL("expected config error");
    } catch (const lppl::Error& e) {
        CHECK(e.kind() == lppl::ErrorKind::config);
    }
    FitConfig bad;
    bad.omega_step = 0.0;
    CHECK_THROWS_AS(lppl::grid_search(s, bad), lppl::Error);
    FitConfig dz;
    dz.alpha_dead_zone = 0.01;
    CHECK_THROWS_AS(lppl::grid_search(s, dz), lppl::Error);
}

TEST_CASE("default grid covers both published regimes") {
    const auto s = lppl::generate(fig8_weekly());
    const auto g = lppl::make_grid(s, FitConfig{});
    CHECK(g.alpha.front() == Catch::Approx(-3.0));
    CHECK(g.alpha.back() == Catch::Approx(1.0));
    for (double a : g.alpha) REQUIRE(std::abs(a) >= 0.05 - 1e-12);
    CHECK(g.alpha.size() == 80);
    CHECK(g.omega.size() == 57);
    CHECK(g.tc.front() > s.back_time() + s.sample_interval());
    CHECK(g.tc.back() <= s.back_time() + 5.0 + 1e-9);
}

TEST_CASE("refine_local recovers the truth from a perturbed start") {
    const auto truth = published::fig8();
    const auto s = lppl::generate(fig8_weekly());
    const double tc0 = truth.tc + 0.1, a0 = truth.alpha + 0.05, w0 = truth.omega + 0.5;
    lppl::Candidate start{tc0, a0, w0, lppl::solve_linear(tc0, std::min(a0, 1.0), w0, s)};
    start.alpha = std::min(a0, 1.0);
    FitConfig cfg;
    const auto r = lppl::refine_local(start, s, cfg);
    CHECK(std::abs(r.params.tc - truth.tc) < 1e-3);
    CHECK(r.sse <= start.linear.sse);
    CHECK(r.converged);
}

TEST_CASE("refine_local: fixed point and zero budget") {
    const auto truth = published::fig8();
    const auto s = lppl::generate(fig8_weekly());
    const lppl::Candidate at_truth{truth.tc, truth.alpha, truth.omega,
                                   lppl::solve_linear(truth.tc, truth.alpha, truth.omega, s)};
    const auto r = lppl::refine_local(at_truth, s, FitConfig{});
    CHECK(r.converged);
    CHECK(r.sse <= at_truth.linear.sse);
    CHECK(r.params.tc == Catch::Approx(truth.tc).margin(1e-9));
    CHECK(r.params.alpha == Catch::Approx(truth.alpha).margin(1e-9));
    CHECK(r.params.omega == Catch::Approx(truth.omega).margin(1e-9));

    FitConfig none;
    none.refine_max_iters = 0;
    const lppl::Candidate off{truth.tc + 0.2, 0.8, 14.0, lppl::solve_linear(truth.tc + 0.2, 0.8, 14.0, s)};
    const auto z = lppl::refine_local(off, s, none);
    CHECK_FALSE(z.converged);
    CHECK(z.iterations == 0);
    CHECK(z.params.tc == off.tc);
    CHECK(z.params.alpha == off.alpha);
    CHECK(z.params.omega == off.omega);
    CHECK(z.sse == off.linear.sse);
}

TEST_CASE("fit: monotone pipeline and determinism") {
    const auto s = lppl::generate(fig8_weekly(80.0, 4));
    auto cfg = narrow_config();
    const auto cands = lppl::grid_search(s, cfg);
    const auto r = lppl::fit(s, cfg);
    CHECK(r.sse <= cands.front().linear.sse);
    CHECK(r.rmse == Catch::Approx(std::sqrt(r.sse / r.n_points)).epsilon(1e-15));
    CHECK(r.params.tc > r.window.end);
    CHECK(r.n_points == s.size());

    cfg.threads = 4;
    const auto r4 = lppl::fit(s, cfg);
    CHECK(r4.params == r.params);
    CHECK(r4.sse == r.sse);
    CHECK(r4.iterations == r.iterations);
    CHECK(r4.candidates_evaluated == r.candidates_evaluated);
}

TEST_CASE("fit: precondition errors") {
    const auto s = lppl::generate(fig8_weekly());
    std::vector<double> t(s.times().begin(), s.times().begin() + 7);
    std::vector<double> p(s.prices().begin(), s.prices().begin() + 7);
    try {
        lppl::fit(PriceSeries(t, p), FitConfig{});
        FAIL("expected config error");
    } catch (const lppl::Error& e) {
        CHECK(e.kind() == lppl::ErrorKind::config);
    }
    FitConfig log_cfg;
    log_cfg.scale = lppl::Scale::log;
    CHECK_THROWS_AS(lppl::fit(s, log_cfg), lppl::Error);
}

TEST_CASE("fit: scale equivariance") {
    const auto s = lppl::generate(fig8_weekly(60.0, 9));
    const double k = 3.0;
    std::vector<double> scaled(s.prices().begin(), s.prices().end());
    for (double& x : scaled) x *= k;
    const PriceSeries sk(std::vector<double>(s.times().begin(), s.times().end()), scaled);
    const auto cfg = narrow_config();
    const auto a = lppl::fit(s, cfg);
    const auto b = lppl::fit(sk, cfg);
    CHECK(b.params.tc == Catch::Approx(a.params.tc).epsilon(1e-6));
    CHECK(b.params.alpha == Catch::Approx(a.params.alpha).epsilon(1e-6));
    CHECK(b.params.omega == Catch::Approx(a.params.omega).epsilon(1e-6));
    CHECK(b.params.A == Catch::Approx(k * a.params.A).epsilon(1e-6));
    CHECK(b.params.B == Catch::Approx(k * a.params.B).epsilon(1e-6));
    CHECK(b.params.C1 == Catch::Approx(k * a.params.C1).epsilon(1e-6));
    CHECK(b.params.C2 == Catch::Approx(k * a.params.C2).epsilon(1e-6));
    CHECK(b.sse == Catch::Approx(k * k * a.sse).epsilon(1e-6));
}

TEST_CASE("fit on the log scale") {
    auto spec = fig8_weekly();
    const auto raw = lppl::generate(spec);
    const auto logs = lppl::log_transform(raw);
    auto cfg = narrow_config();
    cfg.scale = lppl::Scale::log;
    const auto r = lppl::fit(logs, cfg);
    CHECK(r.params.scale == lppl::Scale::log);
    CHECK(r.params.tc > r.window.end);
    CHECK(std::isfinite(r.sse));
}
