#pragma once

#include "raptt/error.hpp"
#include "raptt/specfun.hpp"
#include "raptt/randsrc.hpp"
#include "raptt/parallel.hpp"
#include "raptt/projections.hpp"
#include "raptt/linstat.hpp"
#include "raptt/hotelling.hpp"
#include "raptt/calibration.hpp"
#include "raptt/competitors.hpp"
#include "raptt/covariance.hpp"
#include "raptt/gof.hpp"
#include "raptt/simharness.hpp"
#include "raptt/dataio.hpp"
