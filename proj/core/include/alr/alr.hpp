#pragma once

#include "alr/curve_io.hpp"
#include "alr/dataset.hpp"
#include "alr/error.hpp"
#include "alr/harness.hpp"
#include "alr/metrics.hpp"
#include "alr/pool_state.hpp"
#include "alr/regression.hpp"
#include "alr/strategies.hpp"
