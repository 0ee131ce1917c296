#include "blindinv/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace blindinv {

void validate(const Signal& x) {
  if (x.sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  for (double v : x.samples) {
    if (!std::isfinite(v)) throw DegenerateInputError("signal contains non-finite sample");
  }
}

Signal normalize_peak(const Signal& x) {
  if (x.samples.empty()) throw DegenerateInputError("normalize_peak: empty signal");
  double peak = 0.0;
  for (double v : x.samples) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) throw DegenerateInputError("normalize_peak: all-zero signal");
  Signal out{std::vector<double>(x.samples.size()), x.sample_rate};
  for (std::size_t i = 0; i < x.samples.size(); ++i) out.samples[i] = x.samples[i] / peak;
  return out;
}

Signal preemphasize(const Signal& x, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) throw ConfigError("preemphasize: alpha must be in [0,1)");
  Signal out{std::vector<double>(x.samples.size()), x.sample_rate};
  double prev = 0.0;
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    out.samples[i] = x.samples[i] - alpha * prev;
    prev = x.samples[i];
  }
  return out;
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;  // normalized (a0 == 1)

  void apply(std::vector<double>& s) const {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& v : s) {
      double x0 = v;
      double y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1; x1 = x0;
      y2 = y1; y1 = y0;
      v = y0;
    }
  }
};

// RBJ cookbook biquads, Butterworth Q.
Biquad butter_lowpass(double fc, double fs) {
  double w0 = 2.0 * std::numbers::pi * fc / fs;
  double q = 1.0 / std::sqrt(2.0);
  double alpha = std::sin(w0) / (2.0 * q);
  double c = std::cos(w0);
  double a0 = 1.0 + alpha;
  return {(1 - c) / 2 / a0, (1 - c) / a0, (1 - c) / 2 / a0, -2 * c / a0, (1 - alpha) / a0};
}

Biquad butter_highpass(double fc, double fs) {
  double w0 = 2.0 * std::numbers::pi * fc / fs;
  double q = 1.0 / std::sqrt(2.0);
  double alpha = std::sin(w0) / (2.0 * q);
  double c = std::cos(w0);
  double a0 = 1.0 + alpha;
  return {(1 + c) / 2 / a0, -(1 + c) / a0, (1 + c) / 2 / a0, -2 * c / a0, (1 - alpha) / a0};
}

}  // namespace

Signal bandlimit_telephone(const Signal& x) {
  if (x.sample_rate < 8000) {
    throw ConfigError("bandlimit_telephone: sample_rate must be at least 8000 Hz");
  }
  Biquad hp = butter_highpass(300.0, x.sample_rate);
  Biquad lp = butter_lowpass(3400.0, x.sample_rate);
  Signal out = x;
  // Forward-backward pass of both sections gives zero phase.
  hp.apply(out.samples);
  lp.apply(out.samples);
  std::reverse(out.samples.begin(), out.samples.end());
  hp.apply(out.samples);
  lp.apply(out.samples);
  std::reverse(out.samples.begin(), out.samples.end());
  return out;
}

std::vector<double> hamming_window(std::size_t len) {
  std::vector<double> w(len, 1.0);
  if (len < 2) return w;
  for (std::size_t n = 0; n < len; ++n) {
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / double(len - 1));
  }
  return w;
}

FrameSequence frame_and_window(const Signal& x, double frame_ms, double overlap_frac) {
  if (overlap_frac < 0.0 || overlap_frac >= 1.0) {
    throw ConfigError("frame_and_window: overlap_frac must be in [0,1)");
  }
  std::size_t frame_len = std::size_t(std::llround(frame_ms * x.sample_rate / 1000.0));
  if (frame_len < 2) throw ConfigError("frame_and_window: frame shorter than 2 samples");
  std::size_t hop = frame_len - std::size_t(std::floor(overlap_frac * double(frame_len)));
  if (hop < 1) hop = 1;

  FrameSequence fs;
  fs.frame_len = frame_len;
  fs.hop = hop;
  const std::size_t n = x.samples.size();
  if (n < frame_len) return fs;
  std::vector<double> win = hamming_window(frame_len);
  std::size_t count = (n - frame_len) / hop + 1;
  fs.frames.reserve(count);
  for (std::size_t f = 0; f < count; ++f) {
    std::vector<double> frame(frame_len);
    const double* src = x.samples.data() + f * hop;
    for (std::size_t i = 0; i < frame_len; ++i) frame[i] = src[i] * win[i];
    fs.frames.push_back(std::move(frame));
  }
  return fs;
}

}  // namespace blindinv
