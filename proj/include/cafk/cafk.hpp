#pragma once

#include "cafk/config_io.hpp"
#include "cafk/core.hpp"
#include "cafk/data.hpp"
#include "cafk/errors.hpp"
#include "cafk/experiments.hpp"
#include "cafk/fk_opt.hpp"
#include "cafk/graph.hpp"
#include "cafk/neural/adam.hpp"
#include "cafk/neural/cafknet.hpp"
#include "cafk/neural/checkpoint.hpp"
#include "cafk/neural/mlp.hpp"
#include "cafk/neural/mlp_baseline.hpp"
#include "cafk/neural/params.hpp"
#include "cafk/report.hpp"
