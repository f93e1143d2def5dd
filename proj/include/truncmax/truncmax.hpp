#pragma once

#include "truncmax/accumulate.hpp"
#include "truncmax/constants.hpp"
#include "truncmax/errors.hpp"
#include "truncmax/experiments.hpp"
#include "truncmax/format.hpp"
#include "truncmax/geometry.hpp"
#include "truncmax/grid.hpp"
#include "truncmax/grid_io.hpp"
#include "truncmax/operators.hpp"
#include "truncmax/parallel.hpp"
#include "truncmax/params.hpp"
#include "truncmax/verification.hpp"
