#pragma once

#include "fwvip/baselines.hpp"
#include "fwvip/counters.hpp"
#include "fwvip/geometry.hpp"
#include "fwvip/harness.hpp"
#include "fwvip/operators.hpp"
#include "fwvip/rng.hpp"
#include "fwvip/saddle_fw.hpp"
#include "fwvip/tap.hpp"
#include "fwvip/vip_fw.hpp"
