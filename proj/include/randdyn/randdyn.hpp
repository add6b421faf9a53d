#pragma once

// Umbrella header: simulation and analytic verification of the linear
// dynamics x'(t) = -kappa x + A x with a random coupling matrix
// A = n^{-1/2} W.

#include "common.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "empirics.hpp"
#include "ensembles.hpp"
#include "harness.hpp"
#include "laws.hpp"
#include "propagator.hpp"
#include "report_io.hpp"
#include "rng.hpp"
