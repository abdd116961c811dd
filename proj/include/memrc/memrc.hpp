#pragma once

#include "memrc/common.hpp"
#include "memrc/config.hpp"
#include "memrc/devicesim.hpp"
#include "memrc/experiments.hpp"
#include "memrc/metrics.hpp"
#include "memrc/readout.hpp"
#include "memrc/reservoir.hpp"
#include "memrc/signalio.hpp"
#include "memrc/svg.hpp"
#include "memrc/synth_digits.hpp"
