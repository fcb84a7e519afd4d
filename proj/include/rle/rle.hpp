#pragma once

// Brownian motion and the Riemannian Langevin equation on Hessian
// geometries of canonical barriers.

#include "rle/analysis.hpp"
#include "rle/centralpath.hpp"
#include "rle/certify.hpp"
#include "rle/cones.hpp"
#include "rle/energy.hpp"
#include "rle/geometry.hpp"
#include "rle/parallel.hpp"
#include "rle/random.hpp"
#include "rle/sampling.hpp"
#include "rle/sde.hpp"
#include "rle/stats.hpp"
#include "rle/suites.hpp"
#include "rle/types.hpp"
#include "rle/user_geometry.hpp"
