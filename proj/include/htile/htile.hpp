#pragma once

#include "htile/error.hpp"
#include "htile/rational.hpp"
#include "htile/graph.hpp"
#include "htile/random.hpp"
#include "htile/distribution.hpp"
#include "htile/instance.hpp"
#include "htile/copies.hpp"
#include "htile/json_io.hpp"
#include "htile/solution.hpp"
#include "htile/exact.hpp"
#include "htile/heuristic.hpp"
#include "htile/theory.hpp"
#include "htile/stats.hpp"
#include "htile/experiments.hpp"
