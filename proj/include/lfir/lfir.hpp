#pragma once

#include "version.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "linalg.hpp"
#include "state_space.hpp"
#include "schur.hpp"
#include "sylvester.hpp"
#include "decompose.hpp"
#include "laurent.hpp"
#include "controllers.hpp"
#include "simulate.hpp"
#include "regressor.hpp"
#include "estimators.hpp"
#include "recursive.hpp"
#include "realization.hpp"
#include "bounds.hpp"
#include "io.hpp"
#include "experiments.hpp"
