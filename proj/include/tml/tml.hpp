#pragma once

#include "tml/assignment.hpp"
#include "tml/config.hpp"
#include "tml/encode.hpp"
#include "tml/error.hpp"
#include "tml/flow_map.hpp"
#include "tml/geometry.hpp"
#include "tml/io.hpp"
#include "tml/kv_config.hpp"
#include "tml/metrics.hpp"
#include "tml/pose.hpp"
#include "tml/random.hpp"
#include "tml/reports.hpp"
#include "tml/scoring.hpp"
#include "tml/skeleton.hpp"
#include "tml/stride_sampler.hpp"
#include "tml/synth.hpp"
#include "tml/tracker.hpp"
