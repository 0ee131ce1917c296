// Radix-2 complex FFT, power-of-two lengths only.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace blindinv {

void fft_inplace(std::vector<std::complex<double>>& a);

// Magnitude spectrum of a real frame zero-padded to fft_size; bins 0..fft_size/2.
std::vector<double> magnitude_spectrum(const std::vector<double>& frame, std::size_t fft_size);

std::size_t next_pow2(std::size_t n);

}  // namespace blindinv
