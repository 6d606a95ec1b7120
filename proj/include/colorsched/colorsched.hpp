#pragma once

// Convenience umbrella: pulls in the whole library.

#include "colorsched/allocator.hpp"
#include "colorsched/cache_analysis.hpp"
#include "colorsched/cache_config.hpp"
#include "colorsched/coloring.hpp"
#include "colorsched/errors.hpp"
#include "colorsched/heuristics.hpp"
#include "colorsched/io.hpp"
#include "colorsched/oracles.hpp"
#include "colorsched/plot.hpp"
#include "colorsched/program.hpp"
#include "colorsched/rng.hpp"
#include "colorsched/schedulability.hpp"
#include "colorsched/sweep.hpp"
#include "colorsched/synthetic.hpp"
#include "colorsched/task.hpp"
#include "colorsched/wcet.hpp"
