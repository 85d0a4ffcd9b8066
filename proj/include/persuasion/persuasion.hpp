#pragma once

#include "persuasion/config.hpp"
#include "persuasion/equilibrium.hpp"
#include "persuasion/errors.hpp"
#include "persuasion/experiments.hpp"
#include "persuasion/model.hpp"
#include "persuasion/multi_source.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/rng.hpp"
#include "persuasion/simulate.hpp"
#include "persuasion/single_source.hpp"
