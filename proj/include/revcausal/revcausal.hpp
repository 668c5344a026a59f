#pragma once

#include "revcausal/belief.hpp"
#include "revcausal/dag.hpp"
#include "revcausal/equilibrium.hpp"
#include "revcausal/errors.hpp"
#include "revcausal/gaussian.hpp"
#include "revcausal/montecarlo.hpp"
#include "revcausal/scenario_io.hpp"
#include "revcausal/scm.hpp"
