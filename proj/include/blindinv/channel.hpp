// Forward simulation of the distortion channel: FIR filter followed by a
// memoryless saturation, plus the saturated-testset generator.
#pragma once

#include <vector>

#include "blindinv/signal.hpp"

namespace blindinv {

struct FirFilter {
  std::vector<double> taps;
  std::size_t reference_index = 0;  // tap treated as time origin

  static FirFilter identity() { return {{1.0}, 0}; }
  static FirFilter centered_impulse(std::size_t len) {
    FirFilter f{std::vector<double>(len, 0.0), len / 2};
    f.taps[len / 2] = 1.0;
    return f;
  }
};

void validate(const FirFilter& h);

struct MemorylessMap {
  enum class Kind { Identity, TanhSaturation, Table };
  Kind kind = Kind::Identity;
  double k = 1.0;                 // TanhSaturation steepness
  std::vector<double> knots_x;    // Table: strictly increasing
  std::vector<double> knots_y;    // Table: strictly increasing

  static MemorylessMap identity() { return {}; }
  static MemorylessMap tanh_saturation(double k);
  static MemorylessMap table(std::vector<double> xs, std::vector<double> ys);

  double operator()(double v) const;
};

// Linear convolution truncated to the input length, aligned at reference_index;
// out-of-range input samples are zero.
Signal fir_convolve(const Signal& s, const FirFilter& h);

// Serial reference kernel; fir_convolve dispatches to an OpenMP version.
void fir_convolve_serial(const double* x, std::size_t n, const double* taps,
                         std::size_t ntaps, std::size_t ref, double* out);
void fir_convolve_parallel(const double* x, std::size_t n, const double* taps,
                           std::size_t ntaps, std::size_t ref, double* out);

Signal apply_nonlinearity(const Signal& x, const MemorylessMap& f);

// e = f(h * s)
Signal wiener_forward(const Signal& s, const FirFilter& h, const MemorylessMap& f);

// Peak-normalize every test then pass it through tanh(k * .).
std::vector<Signal> make_saturated_testset(const std::vector<Signal>& tests, double k = 2.0);

// {"taps": [...], "reference_index": n, "nonlinearity": {"tanh": k} | "identity" | {"table": ...}}
std::string channel_to_json(const FirFilter& h, const MemorylessMap& f);
std::pair<FirFilter, MemorylessMap> channel_from_json(const std::string& text);

}  // namespace blindinv
