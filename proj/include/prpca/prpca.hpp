#pragma once

#include "prpca/error.hpp"
#include "prpca/linalg.hpp"
#include "prpca/projectors.hpp"
#include "prpca/interpolation.hpp"
#include "prpca/operators.hpp"
#include "prpca/solver.hpp"
#include "prpca/diagnostics.hpp"
#include "prpca/rng.hpp"
#include "prpca/simulation.hpp"
#include "prpca/image.hpp"
#include "prpca/io.hpp"
