#pragma once

#include "core.hpp"
#include "interp.hpp"
#include "kernel.hpp"
#include "lattice.hpp"
#include "lattice_sum.hpp"
#include "linsolve.hpp"
#include "nystrom.hpp"
#include "parallel.hpp"
#include "scattering.hpp"
#include "shifted.hpp"
#include "surface.hpp"
#include "window.hpp"
