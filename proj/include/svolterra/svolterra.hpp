#pragma once

#include "svolterra/cli.hpp"
#include "svolterra/coefficients.hpp"
#include "svolterra/csv.hpp"
#include "svolterra/engine.hpp"
#include "svolterra/errors.hpp"
#include "svolterra/experiments.hpp"
#include "svolterra/fbm.hpp"
#include "svolterra/fractional.hpp"
#include "svolterra/grid.hpp"
#include "svolterra/kernels.hpp"
#include "svolterra/path_independence.hpp"
#include "svolterra/quadrature.hpp"
#include "svolterra/rng.hpp"
#include "svolterra/selftest.hpp"
#include "svolterra/special.hpp"
#include "svolterra/spde.hpp"
#include "svolterra/theta_kernel.hpp"
