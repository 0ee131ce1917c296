#include <doctest.h>

#include "blindinv/channel.hpp"
#include "blindinv/rng.hpp"

using namespace blindinv;

TEST_CASE("parallel convolution matches the serial reference bit for bit") {
  Rng rng(50);
  for (std::size_t n : {std::size_t(1), std::size_t(37), std::size_t(10000)}) {
    for (std::size_t ntaps : {std::size_t(1), std::size_t(3), std::size_t(33)}) {
      std::vector<double> x(n), a(n), b(n), taps(ntaps);
      for (double& v : x) v = rng.uniform(-1, 1);
      for (double& v : taps) v = rng.uniform(-1, 1);
      std::size_t ref = ntaps / 2;
      fir_convolve_serial(x.data(), n, taps.data(), ntaps, ref, a.data());
      fir_convolve_parallel(x.data(), n, taps.data(), ntaps, ref, b.data());
      // Identical per-sample accumulation order, so results are exact.
      CHECK(a == b);
    }
  }
}
