#pragma once

#include "lmlrsga/benchmark_games.hpp"
#include "lmlrsga/curvature.hpp"
#include "lmlrsga/errors.hpp"
#include "lmlrsga/experiment.hpp"
#include "lmlrsga/game.hpp"
#include "lmlrsga/optimizers.hpp"
#include "lmlrsga/plots.hpp"
#include "lmlrsga/report_json.hpp"
#include "lmlrsga/spectral.hpp"
#include "lmlrsga/trajectory.hpp"
#include "lmlrsga/types.hpp"
