#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "lppl/model.hpp"
#include "support/oracles.hpp"
#include "support/published.hpp"

using lppl::LpplParams;
using lppl::PublishedParams;

namespace {

LpplParams random_params(std::mt19937_64& rng, bool divergent) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    LpplParams p;
    p.tc = 1950.0 + 100.0 * u(rng);
    p.alpha = divergent ? -(0.05 + 2.9 * u(rng)) : 0.05 + 0.95 * u(rng);
    p.omega = 2.0 + 28.0 * u(rng);
    p.A = 1000.0 + 10000.0 * u(rng);
    p.B = (u(rng) < 0.5 ? -1.0 : 1.0) * (10.0 + 1000.0 * u(rng));
    p.C1 = 200.0 * (u(rng) - 0.5);
    p.C2 = 200.0 * (u(rng) - 0.5);
    return p;
}

}  // namespace

TEST_CASE("evaluate: Fig. 8 vector at tau = 1") {
    const auto p = published::fig8();
    // 10890.6 − 854.392 + 85.6 cos(0.641), 40-digit mpmath
    CHECK(lppl::evaluate(p, 2016.80) == Catch::Approx(10104.81624262394).epsilon(1e-12));
    CHECK(lppl::evaluate(p, 2016.80) ==
          Catch::Approx(oracle::published_form(10890.6, 854.392, -85.6 / 854.392, 0.95, 14.928, 0.641, 2017.80, 2016.80))
              .epsilon(1e-12));
}

TEST_CASE("evaluate: Fig. 9 vector at 2016.0") {
    const auto p = published::fig9();
    // 31.214 + 1.22e7 τ^−2.047 + 4.74e6 τ^−2.047 cos(24.202 ln τ + 2.341), mpmath
    CHECK(lppl::evaluate(p, 2016.0) == Catch::Approx(7349.969404263378).epsilon(1e-10));
}

TEST_CASE("evaluate: constant model") {
    const LpplParams p{2020.0, 0.5, 7.0, 42.0, 0.0, 0.0, 0.0};
    for (double t : {1900.0, 2000.0, 2019.999}) CHECK(lppl::evaluate(p, t) == 42.0);
}

TEST_CASE("evaluate refuses t >= tc") {
    const auto p = published::fig8();
    for (double t : {2017.80, 2018.0}) {
        try {
            lppl::evaluate(p, t);
            FAIL("expected domain error");
        } catch (const lppl::Error& e) {
            CHECK(e.kind() == lppl::ErrorKind::domain);
        }
    }
}

TEST_CASE("from_published") {
    auto lp = lppl::from_published({0.0, 1.0, 0.0, 0.5, 5.0, 0.0, 2020.0});
    CHECK(lp.B == -1.0);
    CHECK(lp.C1 == 0.0);
    CHECK(lp.C2 == 0.0);
    lp = lppl::from_published({0.0, 1.0, 1.0, 0.5, 5.0, 0.0, 2020.0});
    CHECK(lp.C1 == -1.0);
    CHECK(lp.C2 == 0.0);
}

TEST_CASE("from_published agrees with the literal published form at random times") {
    const PublishedParams pp{10890.6, 854.392, -85.6 / 854.392, 0.950, 14.928, 0.641, 2017.80};
    const auto lp = lppl::from_published(pp);
    CHECK(lp.B == -854.392);
    CHECK(lp.C1 == Catch::Approx(85.6 * std::cos(0.641)).epsilon(1e-14));
    CHECK(lp.C2 == Catch::Approx(-85.6 * std::sin(0.641)).epsilon(1e-14));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(2000.0, 2017.79);
    for (int i = 0; i < 100; ++i) {
        const double t = u(rng);
        const double lit = oracle::published_form(pp.A, pp.m, pp.C, pp.alpha, pp.omega, pp.phi, pp.tc, t);
        REQUIRE(lppl::evaluate(lp, t) == Catch::Approx(lit).epsilon(1e-9));
    }
}

TEST_CASE("to_published recovers the Fig. 8 vector modulo gauge") {
    const auto pp = lppl::to_published(published::fig8());
    CHECK(pp.m == 854.392);
    CHECK(pp.omega == 14.928);
    CHECK(pp.C == Catch::Approx(85.6 / 854.392).epsilon(1e-13));
    // published C is negative; gauge C >= 0 shifts φ by π
    CHECK(pp.phi == Catch::Approx(0.641 + std::numbers::pi).epsilon(1e-13));
    CHECK(pp.phi >= 0.0);
    CHECK(pp.phi < 2 * std::numbers::pi);
}

TEST_CASE("to_published gauge-fixed round trip on random vectors") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto lp = random_params(rng, trial % 2 == 1);
        const auto pp = lppl::to_published(lp);
        REQUIRE(pp.C >= 0.0);
        REQUIRE(pp.phi >= 0.0);
        REQUIRE(pp.phi < 2 * std::numbers::pi);
        const auto back = lppl::from_published(pp);
        for (int i = 0; i < 100; ++i) {
            const double t = lp.tc - 0.01 - 50.0 * u(rng);
            const double want = oracle::linear_form(lp.tc, lp.alpha, lp.omega, lp.A, lp.B, lp.C1, lp.C2, t);
            REQUIRE(lppl::evaluate(back, t) == Catch::Approx(want).epsilon(1e-9).margin(1e-9));
        }
    }
}

TEST_CASE("to_published edge cases") {
    const LpplParams zero_osc{2020.0, 0.5, 5.0, 1.0, -2.0, 0.0, 0.0};
    const auto pp = lppl::to_published(zero_osc);
    CHECK(pp.C == 0.0);
    CHECK(pp.phi == 0.0);
    const LpplParams flat{2020.0, 0.5, 5.0, 1.0, 0.0, 1.0, 1.0};
    try {
        lppl::to_published(flat);
        FAIL("expected degenerate-parameter error");
    } catch (const lppl::Error& e) {
        CHECK(e.kind() == lppl::ErrorKind::degenerate_parameter);
    }
}

TEST_CASE("residuals and sse") {
    const auto p = published::fig8();
    std::vector<double> t{2010.0, 2012.5, 2016.0};
    std::vector<double> y;
    for (double x : t) y.push_back(lppl::evaluate(p, x));
    const lppl::PriceSeries exact(t, y);
    for (double r : lppl::residuals(p, exact)) CHECK(r == 0.0);
    CHECK(lppl::sse(p, exact) == 0.0);

    const LpplParams constant{2020.0, 0.5, 5.0, 7.0, 0.0, 0.0, 0.0};
    const lppl::PriceSeries flat({2010.0, 2011.0, 2012.0}, {7.0, 7.0, 7.0});
    CHECK(lppl::sse(constant, flat) == 0.0);

    // hand arithmetic: model is constant 7, prices 10, 3, 7 → residuals 3, −4, 0
    const lppl::PriceSeries hand({2010.0, 2011.0, 2012.0}, {10.0, 3.0, 7.0});
    const auto r = lppl::residuals(constant, hand);
    CHECK(r == std::vector<double>{3.0, -4.0, 0.0});
    CHECK(lppl::sse(constant, hand) == 25.0);
    CHECK(lppl::sum_of_squares({3.0, 4.0}) == 25.0);
}

TEST_CASE("residuals: scale mismatch and domain") {
    const auto p = published::fig8();
    const lppl::PriceSeries logs({2010.0, 2011.0}, {9.0, 9.1}, lppl::Scale::log);
    try {
        lppl::residuals(p, logs);
        FAIL("expected state error");
    } catch (const lppl::Error& e) {
        CHECK(e.kind() == lppl::ErrorKind::state);
    }
    const lppl::PriceSeries late({2017.0, 2018.0}, {9.0, 9.1});
    try {
        lppl::residuals(p, late);
        FAIL("expected domain error");
    } catch (const lppl::Error& e) {
        CHECK(e.kind() == lppl::ErrorKind::domain);
    }
}

TEST_CASE("envelope decays in the bubble regime and grows in the divergent one") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const bool divergent = trial % 2 == 1;
        const auto p = random_params(rng, divergent);
        double prev = lppl::envelope(p, p.tc - 30.0);
        for (int k = 1; k <= 300; ++k) {
            const double t = p.tc - 30.0 + 0.0999 * k;
            const double e = lppl::envelope(p, t);
            if (divergent)
                REQUIRE(e > prev);
            else
                REQUIRE(e < prev);
            prev = e;
        }
    }
}

TEST_CASE("evaluate is continuous on closed subintervals before tc") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_params(rng, trial % 2 == 1);
        const double a = p.tc - 20.0, b = p.tc - 0.01;
        for (int i = 0; i < 200; ++i) {
            const double t = a + (b - a) * i / 200.0;
            const double h = 1e-9;
            const double jump = std::abs(lppl::evaluate(p, t + h) - lppl::evaluate(p, t));
            REQUIRE(jump < 1e-3 * (1.0 + std::abs(lppl::evaluate(p, t))));
        }
    }
}
