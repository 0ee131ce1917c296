// Compares the serial reference kernels against the OpenMP versions.
#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "blindinv/channel.hpp"
#include "blindinv/entropy.hpp"
#include "blindinv/features.hpp"
#include "blindinv/inversion.hpp"
#include "blindinv/rng.hpp"
#include "blindinv/signal.hpp"

using namespace blindinv;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled\n");
#endif

  Rng rng(42);
  const std::size_t n = 1 << 20;
  std::vector<double> x(n), out(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  std::vector<double> taps(64);
  for (double& t : taps) t = rng.uniform(-0.5, 0.5);

  double t_serial = time_best_of(3, [&] {
    fir_convolve_serial(x.data(), n, taps.data(), taps.size(), taps.size() / 2, out.data());
  });
  double t_par = time_best_of(3, [&] {
    fir_convolve_parallel(x.data(), n, taps.data(), taps.size(), taps.size() / 2, out.data());
  });
  std::printf("fir_convolve  n=%zu taps=%zu   serial %.4f s   parallel %.4f s   speedup %.2fx\n", n,
              taps.size(), t_serial, t_par, t_serial / t_par);

  // MFCC over a long signal (parallel over frames inside mfcc()).
  Signal sig;
  sig.sample_rate = 16000;
  sig.samples.assign(x.begin(), x.begin() + 16000 * 30);
  FrameSequence frames = frame_and_window(sig);
  MfccConfig mc;
  double t_mfcc = time_best_of(3, [&] { mfcc(frames, mc); });
  std::printf("mfcc          %zu frames            %.4f s\n", frames.frames.size(), t_mfcc);

  // One inversion iteration budget: cost evaluations dominate.
  Signal e;
  e.sample_rate = 16000;
  e.samples.resize(10000);
  for (double& v : e.samples) v = std::tanh(2.0 * rng.uniform(-1.0, 1.0));
  InversionConfig icfg;
  icfg.max_iters = 5;
  auto t0 = Clock::now();
  estimate_inverse(e, icfg);
  std::printf("estimate_inverse (5 iterations, n=10000)  %.3f s\n", seconds_since(t0));
  return 0;
}
