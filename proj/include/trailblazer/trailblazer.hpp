#pragma once

#include "trailblazer/baselines.hpp"
#include "trailblazer/bench.hpp"
#include "trailblazer/continuous.hpp"
#include "trailblazer/difficulty.hpp"
#include "trailblazer/generators.hpp"
#include "trailblazer/planner.hpp"
#include "trailblazer/tabular.hpp"
#include "trailblazer/tabular_io.hpp"
