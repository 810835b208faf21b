#pragma once

// Umbrella header.

#include "rnewton/autodiff.hpp"
#include "rnewton/continuation.hpp"
#include "rnewton/dual.hpp"
#include "rnewton/errors.hpp"
#include "rnewton/init.hpp"
#include "rnewton/json_io.hpp"
#include "rnewton/linalg.hpp"
#include "rnewton/metrics.hpp"
#include "rnewton/network.hpp"
#include "rnewton/oracles.hpp"
#include "rnewton/problem.hpp"
#include "rnewton/problems.hpp"
#include "rnewton/reference.hpp"
#include "rnewton/residual.hpp"
#include "rnewton/solver.hpp"
