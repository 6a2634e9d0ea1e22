#pragma once

// Umbrella header for the ML-ARIS library.

#include "mlaris/array_sim.hpp"
#include "mlaris/core.hpp"
#include "mlaris/fitting.hpp"
#include "mlaris/io.hpp"
#include "mlaris/iq.hpp"
#include "mlaris/matching.hpp"
#include "mlaris/signal_extraction.hpp"
#include "mlaris/transducer.hpp"
