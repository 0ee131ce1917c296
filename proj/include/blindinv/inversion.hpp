// Hammerstein inverse estimation: monotone piecewise-linear map followed by an
// FIR filter, fitted by minimizing the entropy-rate independence cost.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blindinv/channel.hpp"
#include "blindinv/signal.hpp"

namespace blindinv {

// Monotone piecewise-linear map on fixed abscissae. Ordinate gaps are the
// exponentials of unconstrained parameters, so the map is invertible for any
// parameter vector; evaluation extends linearly beyond the outer knots.
class MonotoneMap {
 public:
  MonotoneMap() = default;
  MonotoneMap(std::vector<double> knots_x, std::vector<double> log_increments, double anchor);

  static MonotoneMap from_ordinates(std::vector<double> knots_x, const std::vector<double>& knots_y);

  std::size_t n_knots() const { return knots_x_.size(); }
  const std::vector<double>& knots_x() const { return knots_x_; }
  const std::vector<double>& log_increments() const { return log_increments_; }
  double anchor() const { return anchor_; }
  std::vector<double> ordinates() const;

  double operator()(double v) const;
  double derivative(double v) const;
  void apply(const std::vector<double>& in, std::vector<double>& out,
             std::vector<double>* slopes = nullptr) const;

  // g(v) - offset then scaled by 1/scale; an exact reparameterization.
  MonotoneMap normalized(double offset, double scale) const;

 private:
  std::size_t segment(double v) const;
  void rebuild();

  std::vector<double> knots_x_;
  std::vector<double> log_increments_;
  double anchor_ = 0.0;
  std::vector<double> ords_;    // cached ordinates
  std::vector<double> slopes_;  // cached segment slopes
};

struct HammersteinInverse {
  MonotoneMap g;
  FirFilter w;
};

struct InversionConfig {
  int n_knots = 21;
  int w_len = 21;          // odd, centered reference tap
  int spacing_m = 0;       // 0 = auto; inversion auto is ceil(n^(2/3))
  int max_iters = 500;
  double rel_tol = 1e-7;
  double step_init = 0.1;
  int fft_bins = 1024;
  int max_cost_samples = 10000;  // cost is evaluated on a prefix this long
  double fd_step = 0.01;         // finite-difference probe
  std::uint64_t seed = 0;

  void validate() const;
};

struct InversionTrace {
  std::vector<double> cost_per_iteration;  // accepted costs, non-increasing
  std::string terminated_by;               // "tolerance" | "max_iters"
  double final_cost = 0.0;
};

struct CostTerms {
  double entropy = 0.0;
  double log_gain = 0.0;
  double mean_log_deriv = 0.0;
  double total() const { return entropy - log_gain - mean_log_deriv; }
};

// Mean of log|W(theta)| over fft_bins uniform frequencies, |W| floored at 1e-12.
double filter_log_gain(const FirFilter& w, int fft_bins, int* floored_bins = nullptr);

// Mean of log g'(e(t)).
double mean_log_derivative(const MonotoneMap& g, const std::vector<double>& e);

CostTerms inversion_cost_terms(const HammersteinInverse& inv, const std::vector<double>& e,
                               const InversionConfig& cfg);
double inversion_cost(const HammersteinInverse& inv, const Signal& e, const InversionConfig& cfg);

// Knots at empirical quantiles of e, g ~ identity, w a centered unit impulse.
HammersteinInverse init_inverse(const Signal& e, const InversionConfig& cfg);

std::pair<HammersteinInverse, InversionTrace> estimate_inverse(const Signal& e,
                                                               const InversionConfig& cfg);

// Apply the estimated inverse: w * g(e).
Signal apply_inverse(const HammersteinInverse& inv, const Signal& e);
// Nonlinear compensation only: g(e).
Signal apply_inverse_map_only(const HammersteinInverse& inv, const Signal& e);

std::string inverse_to_json(const HammersteinInverse& inv);
HammersteinInverse inverse_from_json(const std::string& text);
std::string trace_to_csv(const InversionTrace& trace);

}  // namespace blindinv
