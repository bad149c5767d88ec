#pragma once

#include "gamelat/config.hpp"
#include "gamelat/convergence.hpp"
#include "gamelat/errors.hpp"
#include "gamelat/lattice.hpp"
#include "gamelat/mc.hpp"
#include "gamelat/payoff.hpp"
#include "gamelat/rng.hpp"
#include "gamelat/solver.hpp"
#include "gamelat/volatility.hpp"
