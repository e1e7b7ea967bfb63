#pragma once

#include "lppl/fitting.hpp"
#include "lppl/synth.hpp"
#include "support/published.hpp"

namespace fixture {

// Weekly Fig. 8 series on [2009.25, 2016.25].
inline lppl::SynthSpec fig8_weekly(double sigma = 0.0, std::uint64_t seed = 0) {
    lppl::SynthSpec spec;
    spec.params = published::fig8();
    spec.t_start = 2009.25;
    spec.t_end = 2016.25;
    spec.n_points = 366;
    spec.noise_sigma = sigma;
    spec.seed = seed;
    return spec;
}

// Small grid around the Fig. 8 triple for quick tests.
inline lppl::FitConfig narrow_config() {
    lppl::FitConfig cfg;
    cfg.tc_offset_max = 2.5;
    cfg.tc_step = 0.1;
    cfg.alpha_min = 0.5;
    cfg.alpha_max = 1.0;
    cfg.alpha_step = 0.1;
    cfg.omega_min = 12.0;
    cfg.omega_max = 18.0;
    cfg.omega_step = 1.0;
    cfg.multistart_top_k = 3;
    return cfg;
}

}  // namespace fixture
