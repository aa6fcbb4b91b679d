#pragma once

#include "errors.hpp"
#include "numerics.hpp"
#include "functions.hpp"
#include "network.hpp"
#include "scenario.hpp"
#include "allocation.hpp"
#include "issuer_game.hpp"
#include "analysis.hpp"
#include "config.hpp"
