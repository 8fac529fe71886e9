#pragma once

#include "switchoff/error.hpp"
#include "switchoff/numerics.hpp"
#include "switchoff/profiles.hpp"
#include "switchoff/random.hpp"
#include "switchoff/solver.hpp"
#include "switchoff/stochastic.hpp"
