#pragma once

// Umbrella header: analytic chains, brute-force oracle, physical-layer
// simulator, sweep driver, and cross-validation for grant-free random access
// with pre-configured receive-SNR ladders.

#include "gfnoma/aoi.hpp"
#include "gfnoma/combinatorics.hpp"
#include "gfnoma/kernel.hpp"
#include "gfnoma/levels.hpp"
#include "gfnoma/oracle.hpp"
#include "gfnoma/params.hpp"
#include "gfnoma/rng.hpp"
#include "gfnoma/sic.hpp"
#include "gfnoma/sim.hpp"
#include "gfnoma/sweep.hpp"
#include "gfnoma/textio.hpp"
#include "gfnoma/validate.hpp"
