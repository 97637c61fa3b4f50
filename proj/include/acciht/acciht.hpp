#pragma once

#include "acciht/analysis.hpp"
#include "acciht/errors.hpp"
#include "acciht/experiments.hpp"
#include "acciht/io.hpp"
#include "acciht/models.hpp"
#include "acciht/numerics.hpp"
#include "acciht/objectives.hpp"
#include "acciht/problems.hpp"
#include "acciht/report.hpp"
#include "acciht/solvers.hpp"
