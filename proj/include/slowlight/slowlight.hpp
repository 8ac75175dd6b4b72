#pragma once

#include "slowlight/adjudicate.hpp"
#include "slowlight/config.hpp"
#include "slowlight/convergence.hpp"
#include "slowlight/error.hpp"
#include "slowlight/io.hpp"
#include "slowlight/lattice.hpp"
#include "slowlight/modulation.hpp"
#include "slowlight/numerics.hpp"
#include "slowlight/params.hpp"
#include "slowlight/residuals.hpp"
#include "slowlight/run.hpp"
#include "slowlight/soliton.hpp"
#include "slowlight/solver.hpp"
#include "slowlight/trajectory.hpp"
