#pragma once

// Umbrella header pulling in the whole library: special functions,
// fixed-point solvers, rank-1 closed forms, graph generation, core peeling,
// branching-process simulation and the experiment harness.

#include "corebp/bp.hpp"
#include "corebp/core.hpp"
#include "corebp/experiment.hpp"
#include "corebp/generate.hpp"
#include "corebp/graph.hpp"
#include "corebp/kernel.hpp"
#include "corebp/poisson.hpp"
#include "corebp/quadrature.hpp"
#include "corebp/rank1.hpp"
#include "corebp/rng.hpp"
#include "corebp/solve.hpp"
