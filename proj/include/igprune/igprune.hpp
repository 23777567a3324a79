#pragma once

// Core library: networks, criteria, training and pruning. Needs Eigen only.
// The experiment harness (config.hpp, report.hpp, experiment.hpp) also needs
// yaml-cpp and nlohmann_json and is included separately.

#include "igprune/checkpoint.hpp"
#include "igprune/criteria.hpp"
#include "igprune/data.hpp"
#include "igprune/error.hpp"
#include "igprune/idx.hpp"
#include "igprune/mask.hpp"
#include "igprune/network.hpp"
#include "igprune/pruner.hpp"
#include "igprune/tensor.hpp"
#include "igprune/trainer.hpp"
