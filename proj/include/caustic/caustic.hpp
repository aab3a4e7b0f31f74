#ifndef CAUSTIC_CAUSTIC_HPP
#define CAUSTIC_CAUSTIC_HPP

#include "airy.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "densities.hpp"
#include "montecarlo.hpp"
#include "parallel.hpp"
#include "projector.hpp"
#include "quadrature.hpp"
#include "scaled_kernel.hpp"
#include "semiclassical.hpp"
#include "tracked_real.hpp"

#endif
