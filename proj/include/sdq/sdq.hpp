#pragma once

// Multiclass single-server queue with service-class-dependent arrival rates:
// stability classification, fluid drain analysis, branching-tree busy periods,
// busy-period transforms, heavy-tail constants, and an event-driven simulator.

#include "sdq/branching.hpp"
#include "sdq/errors.hpp"
#include "sdq/fluid.hpp"
#include "sdq/linalg.hpp"
#include "sdq/lst.hpp"
#include "sdq/model.hpp"
#include "sdq/model_io.hpp"
#include "sdq/quadrature.hpp"
#include "sdq/rng.hpp"
#include "sdq/service.hpp"
#include "sdq/sim.hpp"
#include "sdq/version.hpp"
