#pragma once

#include "geolab/kernels.hpp"

namespace geolab::kernels::detail {

// Defined in kernels_avx2.cpp; returns null when compiled without AVX2.
const KernelTable* avx2_table();

}  // namespace geolab::kernels::detail
