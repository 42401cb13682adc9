#pragma once

#include "xtq/bounds.hpp"
#include "xtq/error.hpp"
#include "xtq/error_fit.hpp"
#include "xtq/estimator.hpp"
#include "xtq/events.hpp"
#include "xtq/grid.hpp"
#include "xtq/io.hpp"
#include "xtq/normal.hpp"
#include "xtq/parallel.hpp"
#include "xtq/planner.hpp"
#include "xtq/ratings.hpp"
#include "xtq/rng.hpp"
#include "xtq/sampler.hpp"
#include "xtq/simulator.hpp"
#include "xtq/solver.hpp"
#include "xtq/sparse.hpp"
#include "xtq/svg.hpp"
#include "xtq/synth.hpp"

#define XTQ_VERSION "0.1.0"
