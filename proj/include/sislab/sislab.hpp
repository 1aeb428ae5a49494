#pragma once

#include "sislab/error.hpp"
#include "sislab/grid.hpp"
#include "sislab/expression.hpp"
#include "sislab/operators.hpp"
#include "sislab/linear_solvers.hpp"
#include "sislab/model.hpp"
#include "sislab/stepper.hpp"
#include "sislab/diagnostics.hpp"
#include "sislab/run.hpp"
#include "sislab/equilibria.hpp"
#include "sislab/classifier.hpp"
#include "sislab/scenario.hpp"
