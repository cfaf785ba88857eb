#pragma once

// Everything except the command-line front end.

#include "maxgraph/analysis.hpp"
#include "maxgraph/calculus.hpp"
#include "maxgraph/error.hpp"
#include "maxgraph/geodesic.hpp"
#include "maxgraph/io.hpp"
#include "maxgraph/maximal_solver.hpp"
#include "maxgraph/mesh.hpp"
#include "maxgraph/moduli.hpp"
#include "maxgraph/ode_oracle.hpp"
#include "maxgraph/singular_config.hpp"
