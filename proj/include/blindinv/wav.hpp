// Minimal 16-bit PCM mono WAV reader/writer plus one-column CSV dump.
#pragma once

#include <string>

#include "blindinv/signal.hpp"

namespace blindinv {

Signal read_wav(const std::string& path);

// Samples are clipped to [-1, 1) and quantized to 16-bit signed PCM.
void write_wav(const std::string& path, const Signal& x);

// One column, header "amplitude".
void write_csv(const std::string& path, const Signal& x);
Signal read_csv(const std::string& path, int sample_rate);

}  // namespace blindinv
