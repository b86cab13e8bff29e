#pragma once

// Umbrella header. report_io.hpp is not included here because it pulls in the
// vendored JSON library; include it explicitly where serialization is needed.

#include "pulseilp/dynamics.hpp"
#include "pulseilp/energy.hpp"
#include "pulseilp/errors.hpp"
#include "pulseilp/experiments.hpp"
#include "pulseilp/instance.hpp"
#include "pulseilp/instance_io.hpp"
#include "pulseilp/oracle.hpp"
#include "pulseilp/rng.hpp"
#include "pulseilp/stats.hpp"
