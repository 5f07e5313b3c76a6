#pragma once

// Everything in one include.
#include "cnls/amplitudes.hpp"
#include "cnls/config.hpp"
#include "cnls/error.hpp"
#include "cnls/instanton.hpp"
#include "cnls/ladder.hpp"
#include "cnls/model.hpp"
#include "cnls/plot.hpp"
#include "cnls/radial/bn.hpp"
#include "cnls/radial/eigen.hpp"
#include "cnls/radial/field.hpp"
#include "cnls/radial/functional.hpp"
#include "cnls/radial/grid.hpp"
#include "cnls/radial/pohozaev.hpp"
#include "cnls/radial/subcritical.hpp"
#include "cnls/report.hpp"
#include "cnls/validate.hpp"
