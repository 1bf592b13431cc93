#pragma once

#include "vexp/corpus.hpp"
#include "vexp/denoise.hpp"
#include "vexp/energy.hpp"
#include "vexp/exponent.hpp"
#include "vexp/grid.hpp"
#include "vexp/integrand.hpp"
#include "vexp/io.hpp"
#include "vexp/modular.hpp"
#include "vexp/parallel.hpp"
#include "vexp/phi.hpp"
#include "vexp/piecewise_bv.hpp"
#include "vexp/relax.hpp"
#include "vexp/variation.hpp"
