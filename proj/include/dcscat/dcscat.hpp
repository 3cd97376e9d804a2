#pragma once

#include "dcscat/error.hpp"
#include "dcscat/units.hpp"
#include "dcscat/channels.hpp"
#include "dcscat/potential.hpp"
#include "dcscat/riccati.hpp"
#include "dcscat/propagator.hpp"
#include "dcscat/matching.hpp"
#include "dcscat/observables.hpp"
#include "dcscat/calibration.hpp"
#include "dcscat/resonance.hpp"
#include "dcscat/scan.hpp"
