#pragma once

// Convenience umbrella for the whole library.

#include <drekit/types.hpp>
#include <drekit/expm.hpp>
#include <drekit/linalg.hpp>
#include <drekit/problem.hpp>
#include <drekit/bivariate.hpp>
#include <drekit/transition.hpp>
#include <drekit/kernel.hpp>
#include <drekit/duality.hpp>
#include <drekit/doubling.hpp>
#include <drekit/analytic.hpp>
#include <drekit/bench.hpp>
#include <drekit/io.hpp>
