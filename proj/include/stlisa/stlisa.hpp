#pragma once

#include "stlisa/aggregation.hpp"
#include "stlisa/cache.hpp"
#include "stlisa/data_model.hpp"
#include "stlisa/error.hpp"
#include "stlisa/inspect.hpp"
#include "stlisa/labels.hpp"
#include "stlisa/permutation.hpp"
#include "stlisa/pipeline.hpp"
#include "stlisa/results.hpp"
#include "stlisa/spatial_weights.hpp"
#include "stlisa/statistics.hpp"
