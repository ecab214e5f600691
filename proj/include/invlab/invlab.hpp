#pragma once

#include "invlab/config.hpp"
#include "invlab/demand.hpp"
#include "invlab/diagnostics.hpp"
#include "invlab/grid.hpp"
#include "invlab/model.hpp"
#include "invlab/outputs.hpp"
#include "invlab/policy_store.hpp"
#include "invlab/rng.hpp"
#include "invlab/simulate.hpp"
#include "invlab/solver.hpp"
#include "invlab/stats.hpp"
