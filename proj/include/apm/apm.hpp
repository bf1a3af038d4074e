#pragma once

#include "apm/acceptance.hpp"
#include "apm/arborescence.hpp"
#include "apm/bench.hpp"
#include "apm/error.hpp"
#include "apm/graph.hpp"
#include "apm/planners.hpp"
