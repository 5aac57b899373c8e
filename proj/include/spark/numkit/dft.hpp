#pragma once

#include <complex>
#include <span>

#include "spark/numkit/tensor.hpp"

namespace spark::numkit {

// Discrete Fourier transform for arbitrary length n >= 4.
// X[k] = sum_j x[j] exp(-2 pi i j k / n). Smooth lengths use mixed-radix
// Cooley-Tukey; lengths with a large prime factor go through Bluestein.
ComplexVec dft(const ComplexVec& x);

// Inverse including the 1/n factor.
ComplexVec inverse_dft(const ComplexVec& x);

// In-place transform on interleaved complex data (no length restriction
// beyond n >= 1). `inverse` flips the exponent sign and does not scale.
void fft_inplace(std::span<std::complex<double>> data, bool inverse = false);

// ln(1 + |DFT(h)[k]|) with h treated as real; length must be divisible by 4.
RealVec log_magnitude(std::span<const double> h);

}  // namespace spark::numkit
