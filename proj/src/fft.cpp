#include "blindinv/fft.hpp"

#include <cmath>
#include <numbers>

#include "blindinv/errors.hpp"

namespace blindinv {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ConfigError("fft: length must be a power of two");
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * std::numbers::pi / double(len);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> magnitude_spectrum(const std::vector<double>& frame, std::size_t fft_size) {
  std::vector<std::complex<double>> buf(fft_size, {0.0, 0.0});
  for (std::size_t i = 0; i < frame.size() && i < fft_size; ++i) buf[i] = {frame[i], 0.0};
  fft_inplace(buf);
  std::vector<double> mag(fft_size / 2 + 1);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(buf[i]);
  return mag;
}

}  // namespace blindinv
