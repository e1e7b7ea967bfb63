// Fits a noiseless synthetic series built from a published DJIA parameter
// vector and prints the recovered parameters and crash-window forecast.

#include <chrono>
#include <iostream>

#include "lppl/lppl.hpp"

int main() {
    const lppl::PublishedParams published{10890.6, 854.392, -85.600 / 854.392, 0.950, 14.928, 0.641, 2017.80};

    lppl::SynthSpec spec;
    spec.params = lppl::from_published(published);
    spec.t_start = 2009.25;
    spec.t_end = 2016.25;
    spec.n_points = 366;  // weekly
    const auto series = lppl::generate(spec);

    const auto t0 = std::chrono::steady_clock::now();
    const auto result = lppl::fit(series, lppl::FitConfig{});
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;

    std::cout << lppl::fit_to_json(result).dump(2) << '\n';
    std::cout << lppl::summary(lppl::crash_window(result)) << '\n';
    std::cout << "fit time: " << elapsed.count() << " s\n";
}
