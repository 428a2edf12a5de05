#pragma once

#include "ldinfomax/core_stats.hpp"
#include "ldinfomax/datagen.hpp"
#include "ldinfomax/eval.hpp"
#include "ldinfomax/experiment.hpp"
#include "ldinfomax/ica.hpp"
#include "ldinfomax/io.hpp"
#include "ldinfomax/polytope.hpp"
#include "ldinfomax/random.hpp"
#include "ldinfomax/solver.hpp"
#include "ldinfomax/types.hpp"
