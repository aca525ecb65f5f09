#pragma once

#include "hsaw/dimension.hpp"
#include "hsaw/error.hpp"
#include "hsaw/experiments.hpp"
#include "hsaw/geometry_analysis.hpp"
#include "hsaw/hyperbolic.hpp"
#include "hsaw/parallel.hpp"
#include "hsaw/rng.hpp"
#include "hsaw/samplers.hpp"
#include "hsaw/serialization.hpp"
#include "hsaw/statistics.hpp"
#include "hsaw/walk.hpp"
