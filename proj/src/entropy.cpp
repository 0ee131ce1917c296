#include "blindinv/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "blindinv/errors.hpp"

namespace blindinv {

double digamma(double x) {
  // Recurrence up to x >= 12, then the asymptotic series.
  double result = 0.0;
  while (x < 12.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0))));
  return result;
}

std::size_t auto_spacing(std::size_t n) {
  return std::size_t(std::ceil(std::sqrt(double(n))));
}

double marginal_entropy(const std::vector<double>& samples, std::size_t m,
                        EntropyDiagnostics* diag) {
  const std::size_t n = samples.size();
  if (m < 1) throw ConfigError("marginal_entropy: m must be >= 1");
  if (n < 2 * m + 2) throw DegenerateInputError("marginal_entropy: need n >= 2m + 2");
  for (double v : samples) {
    if (!std::isfinite(v)) throw DegenerateInputError("marginal_entropy: non-finite sample");
  }
  std::vector<double> xs(samples);
  std::sort(xs.begin(), xs.end());

  // Window [i-m, i+m] clamped to the sample range; c_i compensates the
  // shortened windows at the edges (Ebrahimi-style weights).
  std::size_t clamped = 0;
  double acc = 0.0;
  const double md = double(m);
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t hi = std::min(i + m, n);
    std::size_t lo = (i > m) ? i - m : 1;
    double ci = double(hi - lo) / md;
    double d = xs[hi - 1] - xs[lo - 1];
    if (d < 1e-12) {
      d = 1e-12;
      ++clamped;
    }
    acc += std::log(d * double(n) / (ci * md));
  }
  if (diag) diag->clamped_spacings = clamped;
  return acc / double(n) + std::log(2.0 * md) - digamma(2.0 * md);
}

}  // namespace blindinv
