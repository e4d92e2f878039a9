// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - thin FFT facade over FFTW3 with a process-wide plan cache

#pragma once

#include "mmsounder/constants.hpp"

namespace mmsounder {

// Forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N). No scaling.
cvector fft(const cvector &x);

// Inverse DFT with 1/N scaling, so ifft(fft(x)) == x.
cvector ifft(const cvector &X);

} // namespace mmsounder
