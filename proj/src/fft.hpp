#pragma once

// Thin FFTW wrapper: cached plans, unnormalized transforms over contiguous
// complex<double> buffers. Plan creation is serialized; execution is reentrant.

#include <cstddef>
#include <span>

#include "isac/common.hpp"

namespace isac::detail {

enum class FftDirection { forward, inverse };

/// Unnormalized DFT of `data` in place; forward uses exp(-j...), inverse exp(+j...).
void fft_inplace(std::span<cplx> data, FftDirection dir);

} // namespace isac::detail
