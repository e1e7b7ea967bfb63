#pragma once

// Umbrella header for the LPPL toolkit.

#include "lppl/config.hpp"
#include "lppl/error.hpp"
#include "lppl/fitting.hpp"
#include "lppl/forecast.hpp"
#include "lppl/json_io.hpp"
#include "lppl/model.hpp"
#include "lppl/parallel.hpp"
#include "lppl/series.hpp"
#include "lppl/simplex.hpp"
#include "lppl/synth.hpp"
#include "lppl/timebase.hpp"
#include "lppl/windows.hpp"
