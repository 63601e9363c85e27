#pragma once
// Umbrella header.

#include "pfm/baselines.hpp"
#include "pfm/config.hpp"
#include "pfm/diagnostics.hpp"
#include "pfm/error.hpp"
#include "pfm/experiments.hpp"
#include "pfm/flow_map.hpp"
#include "pfm/impulse_transport.hpp"
#include "pfm/io.hpp"
#include "pfm/kernel.hpp"
#include "pfm/linalg.hpp"
#include "pfm/mac_grid.hpp"
#include "pfm/projection.hpp"
#include "pfm/runner.hpp"
#include "pfm/scenes.hpp"
#include "pfm/simulator.hpp"
#include "pfm/version.hpp"
