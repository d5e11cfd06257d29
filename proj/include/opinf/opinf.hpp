#pragma once

// Umbrella header: learning low-dimensional polynomial models from noisy
// trajectories by operator inference with re-projection, with active
// selection of training rows for a large minimum singular value.

#include "opinf/benchmarks.hpp"
#include "opinf/bounds.hpp"
#include "opinf/dynsys.hpp"
#include "opinf/errors.hpp"
#include "opinf/kron.hpp"
#include "opinf/matio.hpp"
#include "opinf/montecarlo.hpp"
#include "opinf/pod.hpp"
#include "opinf/protocol.hpp"
#include "opinf/regression.hpp"
#include "opinf/reproject.hpp"
#include "opinf/rng.hpp"
#include "opinf/rom.hpp"
#include "opinf/selection.hpp"
