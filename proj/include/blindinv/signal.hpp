// Waveform type and the fixed preprocessing chain: peak normalization,
// pre-emphasis, telephone-band filtering, framing with Hamming windows.
#pragma once

#include <cstddef>
#include <vector>

#include "blindinv/errors.hpp"

namespace blindinv {

struct Signal {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
};

// Throws if samples contain NaN/Inf or sample_rate <= 0.
void validate(const Signal& x);

struct FrameSequence {
  std::vector<std::vector<double>> frames;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
};

// Scales so that max|sample| == 1. All-zero input is rejected.
Signal normalize_peak(const Signal& x);

// y(n) = x(n) - alpha*x(n-1), x(-1) = 0.
Signal preemphasize(const Signal& x, double alpha = 0.95);

// Zero-phase band-pass, passband roughly 300-3400 Hz. Requires fs >= 8000.
Signal bandlimit_telephone(const Signal& x);

// Hamming window weights of length len, w(n) = 0.54 - 0.46*cos(2*pi*n/(len-1)).
std::vector<double> hamming_window(std::size_t len);

// frame_len = round(frame_ms*fs/1000), hop = frame_len - floor(overlap_frac*frame_len).
// Trailing partial frames are discarded; a short signal yields zero frames.
FrameSequence frame_and_window(const Signal& x, double frame_ms = 30.0,
                               double overlap_frac = 2.0 / 3.0);

}  // namespace blindinv
