#pragma once

#include "reclens/attribution.hpp"
#include "reclens/behavior.hpp"
#include "reclens/errors.hpp"
#include "reclens/events.hpp"
#include "reclens/filters.hpp"
#include "reclens/generator.hpp"
#include "reclens/metrics.hpp"
#include "reclens/parallel.hpp"
#include "reclens/pipeline.hpp"
#include "reclens/report.hpp"
#include "reclens/stats.hpp"
#include "reclens/time.hpp"
