#pragma once

#include "secperc/analytic_bounds.hpp"
#include "secperc/components.hpp"
#include "secperc/degree_laws.hpp"
#include "secperc/errors.hpp"
#include "secperc/grid_index.hpp"
#include "secperc/mc_threshold.hpp"
#include "secperc/nelder_mead.hpp"
#include "secperc/parallel.hpp"
#include "secperc/ppp.hpp"
#include "secperc/quadrature.hpp"
#include "secperc/rng.hpp"
#include "secperc/secrecy_graph.hpp"
#include "secperc/statistics.hpp"
#include "secperc/variant.hpp"
