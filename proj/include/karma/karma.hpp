#pragma once

#include "karma/baselines.hpp"
#include "karma/compare.hpp"
#include "karma/config.hpp"
#include "karma/equilibrium.hpp"
#include "karma/error.hpp"
#include "karma/io.hpp"
#include "karma/lp.hpp"
#include "karma/mechanics.hpp"
#include "karma/simulator.hpp"
#include "karma/social_state.hpp"
#include "karma/urgency.hpp"
