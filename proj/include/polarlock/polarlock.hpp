// Umbrella header.
#pragma once

#include "polarlock/anneal.hpp"
#include "polarlock/config.hpp"
#include "polarlock/device.hpp"
#include "polarlock/disturbance.hpp"
#include "polarlock/experiment.hpp"
#include "polarlock/jones.hpp"
#include "polarlock/oracle.hpp"
#include "polarlock/rng.hpp"
#include "polarlock/validate.hpp"
