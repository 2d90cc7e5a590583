#pragma once

#include "zakharov/errors.hpp"
#include "zakharov/estimates.hpp"
#include "zakharov/fit.hpp"
#include "zakharov/functionals.hpp"
#include "zakharov/harness/config.hpp"
#include "zakharov/harness/experiments.hpp"
#include "zakharov/harness/io.hpp"
#include "zakharov/harness/run.hpp"
#include "zakharov/imethod.hpp"
#include "zakharov/solver.hpp"
#include "zakharov/spectral.hpp"
#include "zakharov/state.hpp"
