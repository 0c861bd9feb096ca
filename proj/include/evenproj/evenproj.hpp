#pragma once

#include "evenproj/bvp.hpp"
#include "evenproj/projections.hpp"
#include "evenproj/spectral.hpp"
#include "evenproj/subspace_index.hpp"
#include "evenproj/symcalc.hpp"
