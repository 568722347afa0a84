#pragma once

// Umbrella header for the foliage library: analytic expressions and box
// charts, basic differential operators with their transverse-ellipticity
// and triangularity checks, finitely presented pseudogroups with word
// search and verification sweeps, bundled foliation scenarios, and the
// average-method construction of pseudogroup-invariant metrics.

#include "foliage/errors.hpp"
#include "foliage/tolerances.hpp"
#include "foliage/interval.hpp"
#include "foliage/linalg.hpp"
#include "foliage/expression.hpp"
#include "foliage/numeric.hpp"
#include "foliage/local_map.hpp"
#include "foliage/operator.hpp"
#include "foliage/pseudogroup.hpp"
#include "foliage/scenarios.hpp"
#include "foliage/averaging.hpp"
#include "foliage/json_io.hpp"
