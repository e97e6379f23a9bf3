#pragma once

#include "riesz2w/error.hpp"
#include "riesz2w/geometry.hpp"
#include "riesz2w/measure_io.hpp"
#include "riesz2w/rng.hpp"
#include "riesz2w/parallel.hpp"
#include "riesz2w/kernel.hpp"
#include "riesz2w/grid.hpp"
#include "riesz2w/haar.hpp"
#include "riesz2w/whitney.hpp"
#include "riesz2w/poisson.hpp"
#include "riesz2w/constants.hpp"
#include "riesz2w/stopping.hpp"
#include "riesz2w/generators.hpp"
