#pragma once

// Umbrella header: the full simulator surface in one include.

#include "phlat/basis.hpp"
#include "phlat/common.hpp"
#include "phlat/dynamics.hpp"
#include "phlat/floquet.hpp"
#include "phlat/io.hpp"
#include "phlat/lda.hpp"
#include "phlat/operators.hpp"
#include "phlat/rng.hpp"
#include "phlat/router.hpp"
#include "phlat/semiclassical.hpp"
#include "phlat/sparse.hpp"
#include "phlat/spectral.hpp"
#include "phlat/threadpool.hpp"
