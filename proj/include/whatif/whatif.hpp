// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "whatif/config.hpp"
#include "whatif/demo.hpp"
#include "whatif/error.hpp"
#include "whatif/eval.hpp"
#include "whatif/json_schema.hpp"
#include "whatif/models.hpp"
#include "whatif/rng.hpp"
#include "whatif/scenario.hpp"
#include "whatif/schemas.hpp"
#include "whatif/service.hpp"
#include "whatif/spatial.hpp"
#include "whatif/synth.hpp"
#include "whatif/time.hpp"
#include "whatif/timeseries.hpp"
