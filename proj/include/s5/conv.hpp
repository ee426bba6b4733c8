#pragma once

#include "s5/linalg.hpp"

namespace s5 {

struct SisoKernel {
    RealVector taps;
};

// Impulse response of a diagonal SISO system:
// tap l = Re(sum_n c[n] * lambda_bar[n]^l * b[n]), doubled under conj_sym.
SisoKernel materialize_kernel(const ComplexVector& lambda_bar, const ComplexVector& b_bar,
                              const ComplexVector& c_bar, std::size_t len, bool conj_sym = false);

// Causal convolution y_j = sum_{l <= j} k_l u_{j-l}, computed by zero-padding
// both signals to the next power of two >= 2L and multiplying spectra.
RealVector fft_convolve(const RealVector& u, const SisoKernel& kernel);

// The same SISO linear map evaluated through the recurrence and through the
// FFT kernel path; returns the max absolute output deviation.
double siso_conv_vs_scan(const ComplexVector& lambda_bar, const ComplexVector& b_bar,
                         const ComplexVector& c_bar, const RealVector& u);

}  // namespace s5
