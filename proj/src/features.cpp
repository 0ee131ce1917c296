#include "blindinv/features.hpp"

#include <cmath>
#include <numbers>

#include "blindinv/fft.hpp"

namespace blindinv {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(const MfccConfig& cfg, std::size_t n_bins,
                                                std::size_t fft_size) {
  double f_high = cfg.f_high > 0.0 ? cfg.f_high : cfg.sample_rate / 2.0;
  if (!(f_high > cfg.f_low)) throw ConfigError("mel_filterbank: f_high must exceed f_low");
  if (cfg.n_mel < 2) throw ConfigError("mel_filterbank: need at least 2 filters");
  double mel_lo = hz_to_mel(cfg.f_low);
  double mel_hi = hz_to_mel(f_high);
  std::vector<double> edges(cfg.n_mel + 2);
  for (int i = 0; i < cfg.n_mel + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * double(i) / double(cfg.n_mel + 1));
  }
  std::vector<std::vector<double>> bank(cfg.n_mel, std::vector<double>(n_bins, 0.0));
  for (int f = 0; f < cfg.n_mel; ++f) {
    double lo = edges[f], mid = edges[f + 1], hi = edges[f + 2];
    for (std::size_t b = 0; b < n_bins; ++b) {
      double freq = double(b) * cfg.sample_rate / double(fft_size);
      if (freq >= lo && freq <= mid && mid > lo) {
        bank[f][b] = (freq - lo) / (mid - lo);
      } else if (freq > mid && freq <= hi && hi > mid) {
        bank[f][b] = (hi - freq) / (hi - mid);
      }
    }
  }
  return bank;
}

std::vector<Eigen::VectorXd> mfcc(const FrameSequence& frames, const MfccConfig& cfg) {
  if (frames.frame_len < 2 && !frames.frames.empty()) throw ConfigError("mfcc: frame_len < 2");
  if (cfg.n_mel < cfg.n_coeff + 1) throw ConfigError("mfcc: n_mel must be >= n_coeff + 1");
  std::vector<Eigen::VectorXd> out(frames.frames.size());
  if (frames.frames.empty()) return out;

  const std::size_t fft_size = next_pow2(frames.frame_len);
  const std::size_t n_bins = fft_size / 2 + 1;
  const auto bank = mel_filterbank(cfg, n_bins, fft_size);

  // Orthonormal DCT-II rows 1..n_coeff.
  const int nm = cfg.n_mel;
  Eigen::MatrixXd dct(cfg.n_coeff, nm);
  for (int r = 0; r < cfg.n_coeff; ++r) {
    for (int c = 0; c < nm; ++c) {
      dct(r, c) = std::sqrt(2.0 / nm) *
                  std::cos(std::numbers::pi * (r + 1) * (c + 0.5) / nm);
    }
  }

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t fi = 0; fi < std::ptrdiff_t(frames.frames.size()); ++fi) {
    std::vector<double> mag = magnitude_spectrum(frames.frames[fi], fft_size);
    Eigen::VectorXd loge(nm);
    for (int f = 0; f < nm; ++f) {
      double energy = 0.0;
      for (std::size_t b = 0; b < n_bins; ++b) energy += bank[f][b] * mag[b];
      loge(f) = std::log(std::max(energy, 1e-10));
    }
    out[fi] = dct * loge;
  }
  return out;
}

CovarianceModel covariance_model(const std::vector<Eigen::VectorXd>& features, bool centered) {
  if (features.empty()) throw DegenerateInputError("covariance_model: no features");
  const Eigen::Index l = features.front().size();
  for (const auto& f : features) {
    if (f.size() != l) throw ConfigError("covariance_model: inconsistent feature dimension");
  }
  if (std::ptrdiff_t(features.size()) < l) {
    throw RankDeficiencyError("covariance_model: fewer frames (" +
                              std::to_string(features.size()) + ") than dimension (" +
                              std::to_string(l) + ")");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(l);
  if (centered) {
    for (const auto& f : features) mean += f;
    mean /= double(features.size());
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(l, l);
  for (const auto& f : features) {
    Eigen::VectorXd v = f - mean;
    c.noalias() += v * v.transpose();
  }
  c /= double(features.size());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  double floor = 1e-10 * c.trace() / double(l);
  if (es.eigenvalues().minCoeff() < floor) {
    throw RankDeficiencyError("covariance_model: singular estimate from " +
                              std::to_string(features.size()) + " frames");
  }
  return {c, features.size()};
}

namespace {

void require_spd(const CovarianceModel& m, const char* name) {
  if (m.matrix.rows() != m.matrix.cols()) throw ConfigError("sphericity_distance: non-square matrix");
  double scale = std::max(1.0, m.matrix.cwiseAbs().maxCoeff());
  if (((m.matrix - m.matrix.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale) {
    throw ConfigError(std::string("sphericity_distance: ") + name + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.matrix, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw RankDeficiencyError(std::string("sphericity_distance: ") + name + " is not positive definite");
  }
}

}  // namespace

double sphericity_distance(const CovarianceModel& c_test, const CovarianceModel& c_model) {
  if (c_test.dim() != c_model.dim()) throw ConfigError("sphericity_distance: dimension mismatch");
  require_spd(c_test, "C_test");
  require_spd(c_model, "C_model");
  const double l = double(c_test.dim());
  double tr_ab = c_model.matrix.llt().solve(c_test.matrix).trace();
  double tr_ba = c_test.matrix.llt().solve(c_model.matrix).trace();
  return std::log(tr_ab * tr_ba) - 2.0 * std::log(l);
}

}  // namespace blindinv
