#pragma once

#include "ptycho/tensor.hpp"

namespace ptycho::ad {

/// Unitary 2D DFT (1/sqrt(N) per direction), any rectangular size.
/// fft2_raw(ifft2_raw(x)) == x and both preserve the l2 norm exactly up to
/// rounding, which makes each transform the adjoint of its inverse.
ComplexTensor fft2_raw(const ComplexTensor& a);
ComplexTensor ifft2_raw(const ComplexTensor& a);

/// Signed FFT frequency for bin k of n samples at pitch d (cycles per unit).
double fft_freq(int k, int n, double d);

}  // namespace ptycho::ad
