#pragma once

#include "strichartz/grid_field.hpp"
#include "strichartz/spaces.hpp"
#include "strichartz/propagators.hpp"
#include "strichartz/functionals.hpp"
#include "strichartz/witness.hpp"
#include "strichartz/io.hpp"
#include "strichartz/experiment.hpp"
