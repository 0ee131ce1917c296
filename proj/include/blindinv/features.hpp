// MFCC extraction, per-speaker second-moment models, and the
// arithmetic-harmonic sphericity distance between them.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "blindinv/signal.hpp"

namespace blindinv {

struct MfccConfig {
  int n_mel = 20;
  int n_coeff = 12;      // c1..c12, c0 dropped
  double f_low = 0.0;    // Hz
  double f_high = 0.0;   // 0 = fs/2
  int sample_rate = 16000;
};

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filterbank weights over FFT magnitude bins 0..n_bins-1.
std::vector<std::vector<double>> mel_filterbank(const MfccConfig& cfg, std::size_t n_bins,
                                                std::size_t fft_size);

// Per frame: magnitude FFT (zero-padded to the next power of two), mel filter
// energies floored at 1e-10, log, orthonormal DCT-II, coefficients 1..n_coeff.
std::vector<Eigen::VectorXd> mfcc(const FrameSequence& frames, const MfccConfig& cfg);

struct CovarianceModel {
  Eigen::MatrixXd matrix;  // l x l, SPD
  std::size_t n_frames = 0;

  std::size_t dim() const { return std::size_t(matrix.rows()); }
};

// C = (1/n) * sum x_n x_n^T (non-centered). Rejects rank-deficient estimates.
CovarianceModel covariance_model(const std::vector<Eigen::VectorXd>& features,
                                 bool centered = false);

// d = ln(tr(A B^-1) * tr(B A^-1)) - 2 ln(l). Nonnegative, zero iff A = c*B.
double sphericity_distance(const CovarianceModel& c_test, const CovarianceModel& c_model);

}  // namespace blindinv
