#pragma once

// Self-similar Gaussian random fields indexed by signed measures: exact
// covariance functionals, extracted processes (fBm, bridges, Volterra,
// membranes) and cross-validating sampling backends.

#include "selfsim/errors.hpp"
#include "selfsim/io.hpp"
#include "selfsim/kernel.hpp"
#include "selfsim/measure.hpp"
#include "selfsim/membrane.hpp"
#include "selfsim/montecarlo.hpp"
#include "selfsim/process.hpp"
#include "selfsim/quadrature.hpp"
#include "selfsim/rng.hpp"
