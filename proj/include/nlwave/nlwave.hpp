#pragma once

#include "nlwave/config.hpp"
#include "nlwave/dalembert.hpp"
#include "nlwave/energy.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/experiments.hpp"
#include "nlwave/flux.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/initial_data.hpp"
#include "nlwave/interaction.hpp"
#include "nlwave/io.hpp"
#include "nlwave/leapfrog.hpp"
#include "nlwave/ode/dopri5.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/runner.hpp"
#include "nlwave/selfsimilar.hpp"
#include "nlwave/trajectory.hpp"
#include "nlwave/virial.hpp"
