#include "blindinv/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "blindinv/entropy.hpp"

namespace blindinv {

// ---------------------------------------------------------------- MonotoneMap

MonotoneMap::MonotoneMap(std::vector<double> knots_x, std::vector<double> log_increments,
                         double anchor)
    : knots_x_(std::move(knots_x)), log_increments_(std::move(log_increments)), anchor_(anchor) {
  if (knots_x_.size() < 2) throw ConfigError("MonotoneMap: need at least 2 knots");
  if (log_increments_.size() + 1 != knots_x_.size()) {
    throw ConfigError("MonotoneMap: log_increments size mismatch");
  }
  for (std::size_t i = 1; i < knots_x_.size(); ++i) {
    if (!(knots_x_[i] > knots_x_[i - 1])) {
      throw ConfigError("MonotoneMap: knots_x must be strictly increasing");
    }
  }
  rebuild();
}

MonotoneMap MonotoneMap::from_ordinates(std::vector<double> knots_x,
                                        const std::vector<double>& knots_y) {
  if (knots_y.size() != knots_x.size()) throw ConfigError("MonotoneMap: ordinate size mismatch");
  std::vector<double> li(knots_y.size() - 1);
  for (std::size_t i = 0; i + 1 < knots_y.size(); ++i) {
    double gap = knots_y[i + 1] - knots_y[i];
    if (!(gap > 0.0)) throw ConfigError("MonotoneMap: ordinates must be strictly increasing");
    li[i] = std::log(gap);
  }
  return MonotoneMap(std::move(knots_x), std::move(li), knots_y.front());
}

void MonotoneMap::rebuild() {
  const std::size_t nk = knots_x_.size();
  ords_.resize(nk);
  slopes_.resize(nk - 1);
  ords_[0] = anchor_;
  for (std::size_t i = 0; i + 1 < nk; ++i) {
    ords_[i + 1] = ords_[i] + std::exp(log_increments_[i]);
    slopes_[i] = (ords_[i + 1] - ords_[i]) / (knots_x_[i + 1] - knots_x_[i]);
  }
}

std::vector<double> MonotoneMap::ordinates() const { return ords_; }

std::size_t MonotoneMap::segment(double v) const {
  if (v <= knots_x_.front()) return 0;
  if (v >= knots_x_.back()) return knots_x_.size() - 2;
  return std::size_t(std::upper_bound(knots_x_.begin(), knots_x_.end(), v) - knots_x_.begin()) - 1;
}

double MonotoneMap::operator()(double v) const {
  std::size_t s = segment(v);
  return ords_[s] + slopes_[s] * (v - knots_x_[s]);
}

double MonotoneMap::derivative(double v) const { return slopes_[segment(v)]; }

void MonotoneMap::apply(const std::vector<double>& in, std::vector<double>& out,
                        std::vector<double>* slopes) const {
  out.resize(in.size());
  if (slopes) slopes->resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    std::size_t s = segment(in[i]);
    out[i] = ords_[s] + slopes_[s] * (in[i] - knots_x_[s]);
    if (slopes) (*slopes)[i] = slopes_[s];
  }
}

MonotoneMap MonotoneMap::normalized(double offset, double scale) const {
  if (!(scale > 0.0)) throw ConfigError("MonotoneMap::normalized: scale must be positive");
  std::vector<double> li(log_increments_);
  double ls = std::log(scale);
  for (double& v : li) v -= ls;
  return MonotoneMap(knots_x_, std::move(li), (anchor_ - offset) / scale);
}

// ------------------------------------------------------------------ cost terms

void InversionConfig::validate() const {
  if (n_knots < 4) throw ConfigError("InversionConfig: n_knots must be >= 4");
  if (w_len < 1 || w_len % 2 == 0) throw ConfigError("InversionConfig: w_len must be odd and >= 1");
  if (spacing_m < 0) throw ConfigError("InversionConfig: spacing_m must be >= 0");
  if (max_iters < 1) throw ConfigError("InversionConfig: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw ConfigError("InversionConfig: rel_tol must be positive");
  if (!(step_init > 0.0)) throw ConfigError("InversionConfig: step_init must be positive");
  if (fft_bins < 4 * w_len) throw ConfigError("InversionConfig: fft_bins must be >= 4*w_len");
  if (max_cost_samples < 512) throw ConfigError("InversionConfig: max_cost_samples must be >= 512");
  if (!(fd_step > 0.0)) throw ConfigError("InversionConfig: fd_step must be positive");
}

double filter_log_gain(const FirFilter& w, int fft_bins, int* floored_bins) {
  validate(w);
  if (fft_bins < 4 * int(w.taps.size())) {
    throw ConfigError("filter_log_gain: fft_bins must be >= 4*len(w)");
  }
  int floored = 0;
  double acc = 0.0;
  for (int b = 0; b < fft_bins; ++b) {
    double theta = 2.0 * std::numbers::pi * b / fft_bins;
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < w.taps.size(); ++t) {
      re += w.taps[t] * std::cos(theta * double(t));
      im -= w.taps[t] * std::sin(theta * double(t));
    }
    double mag = std::hypot(re, im);
    if (mag < 1e-12) {
      mag = 1e-12;
      ++floored;
    }
    acc += std::log(mag);
  }
  if (floored_bins) *floored_bins = floored;
  return acc / double(fft_bins);
}

double mean_log_derivative(const MonotoneMap& g, const std::vector<double>& e) {
  if (e.empty()) throw DegenerateInputError("mean_log_derivative: empty input");
  double acc = 0.0;
  for (double v : e) acc += std::log(g.derivative(v));
  return acc / double(e.size());
}

namespace {

std::size_t inversion_spacing(const InversionConfig& cfg, std::size_t n) {
  if (cfg.spacing_m > 0) return std::size_t(cfg.spacing_m);
  return std::size_t(std::ceil(std::pow(double(n), 2.0 / 3.0)));
}

}  // namespace

CostTerms inversion_cost_terms(const HammersteinInverse& inv, const std::vector<double>& e,
                               const InversionConfig& cfg) {
  cfg.validate();
  std::vector<double> x, slopes;
  inv.g.apply(e, x, &slopes);
  std::vector<double> y(e.size());
  fir_convolve_serial(x.data(), x.size(), inv.w.taps.data(), inv.w.taps.size(),
                      inv.w.reference_index, y.data());
  CostTerms terms;
  terms.entropy = marginal_entropy(y, inversion_spacing(cfg, e.size()));
  terms.log_gain = filter_log_gain(inv.w, cfg.fft_bins);
  double acc = 0.0;
  for (double s : slopes) acc += std::log(s);
  terms.mean_log_deriv = acc / double(e.size());
  return terms;
}

double inversion_cost(const HammersteinInverse& inv, const Signal& e, const InversionConfig& cfg) {
  return inversion_cost_terms(inv, e.samples, cfg).total();
}

// --------------------------------------------------------------- initialization

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  double pos = p * double(sorted.size() - 1);
  std::size_t lo = std::size_t(std::floor(pos));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - double(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

HammersteinInverse init_inverse(const Signal& e, const InversionConfig& cfg) {
  cfg.validate();
  if (e.samples.empty()) throw DegenerateInputError("init_inverse: empty signal");
  std::vector<double> sorted(e.samples.begin(),
                             e.samples.begin() +
                                 std::min<std::size_t>(e.samples.size(), cfg.max_cost_samples));
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> knots(cfg.n_knots);
  for (int i = 0; i < cfg.n_knots; ++i) {
    double level = 0.01 + (0.99 - 0.01) * double(i) / double(cfg.n_knots - 1);
    knots[i] = quantile_sorted(sorted, level);
  }
  for (int i = 1; i < cfg.n_knots; ++i) {
    if (!(knots[i] > knots[i - 1])) {
      throw DegenerateInputError("init_inverse: collapsed quantile knots (too few distinct values)");
    }
  }
  HammersteinInverse inv;
  inv.g = MonotoneMap::from_ordinates(knots, knots);  // identity on the knot range
  inv.w = FirFilter::centered_impulse(std::size_t(cfg.w_len));
  return inv;
}

// ------------------------------------------------------------------- estimation

namespace {

// Parameter packing: [anchor, log_increments (nk-1), w taps (w_len)].
struct Packed {
  std::vector<double> p;
  std::vector<double> knots_x;
  int nk;
  int wlen;

  HammersteinInverse unpack() const {
    HammersteinInverse inv;
    inv.g = MonotoneMap(knots_x, std::vector<double>(p.begin() + 1, p.begin() + nk), p[0]);
    inv.w.taps.assign(p.begin() + nk, p.end());
    inv.w.reference_index = std::size_t(wlen / 2);
    return inv;
  }
};

class CostEvaluator {
 public:
  CostEvaluator(const std::vector<double>& e, const InversionConfig& cfg)
      : e_(e), cfg_(cfg), m_(inversion_spacing(cfg, e.size())) {}

  double operator()(const Packed& pk) const {
    HammersteinInverse inv = pk.unpack();
    std::vector<double> x, slopes;
    inv.g.apply(e_, x, &slopes);
    std::vector<double> y(e_.size());
    fir_convolve_serial(x.data(), x.size(), inv.w.taps.data(), inv.w.taps.size(),
                        inv.w.reference_index, y.data());
    double h = marginal_entropy(y, m_);
    double lg = filter_log_gain(inv.w, cfg_.fft_bins);
    double mld = 0.0;
    for (double s : slopes) mld += std::log(s);
    mld /= double(e_.size());
    return h - lg - mld;
  }

 private:
  const std::vector<double>& e_;
  const InversionConfig& cfg_;
  std::size_t m_;
};

// Remove the scale/offset indeterminacy: x = g(e) to zero mean, unit variance;
// w to unit norm. Cost is invariant to this up to the spacing floor, so the
// renormalized cost is re-evaluated and must not exceed the accepted one.
void renormalize(Packed& pk, const std::vector<double>& e) {
  HammersteinInverse inv = pk.unpack();
  std::vector<double> x;
  inv.g.apply(e, x);
  double mu = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  double sd = std::sqrt(var / double(x.size()));
  if (sd > 0.0) {
    double ls = std::log(sd);
    pk.p[0] = (pk.p[0] - mu) / sd;
    for (int i = 1; i < pk.nk; ++i) pk.p[i] -= ls;
  }
  double nrm = 0.0;
  for (int i = pk.nk; i < int(pk.p.size()); ++i) nrm += pk.p[i] * pk.p[i];
  nrm = std::sqrt(nrm);
  if (nrm > 0.0) {
    for (int i = pk.nk; i < int(pk.p.size()); ++i) pk.p[i] /= nrm;
  }
}

}  // namespace

std::pair<HammersteinInverse, InversionTrace> estimate_inverse(const Signal& e,
                                                               const InversionConfig& cfg) {
  cfg.validate();
  if (e.samples.size() < 512) throw DegenerateInputError("estimate_inverse: need >= 512 samples");
  validate(e);

  std::vector<double> ecost(e.samples.begin(),
                            e.samples.begin() +
                                std::min<std::size_t>(e.samples.size(), cfg.max_cost_samples));
  HammersteinInverse init = init_inverse(e, cfg);

  Packed pk;
  pk.nk = cfg.n_knots;
  pk.wlen = cfg.w_len;
  pk.knots_x = init.g.knots_x();
  pk.p.reserve(cfg.n_knots + cfg.w_len);
  pk.p.push_back(init.g.anchor());
  for (double v : init.g.log_increments()) pk.p.push_back(v);
  for (double v : init.w.taps) pk.p.push_back(v);

  CostEvaluator cost(ecost, cfg);
  double c = cost(pk);
  if (!std::isfinite(c)) throw DegenerateInputError("estimate_inverse: non-finite initial cost");

  InversionTrace trace;
  trace.cost_per_iteration.push_back(c);
  trace.terminated_by = "max_iters";

  // Two parameter blocks, each with its own step: the map block (anchor +
  // log increments) and the filter block. Normalized-gradient descent with
  // backtracking per block; gradients of the two blocks have very different
  // noise scales, which is why they are not mixed.
  const int np = int(pk.p.size());
  struct Block {
    int begin, end;
    double step;
  };
  Block blocks[2] = {{0, cfg.n_knots, cfg.step_init}, {cfg.n_knots, np, cfg.step_init}};
  const double h = cfg.fd_step;

  std::vector<double> grad(np);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double c_start = c;
    bool improved = false;
    for (Block& blk : blocks) {
      const int nb = blk.end - blk.begin;
#pragma omp parallel for schedule(dynamic)
      for (int j = 0; j < nb; ++j) {
        Packed probe = pk;
        probe.p[blk.begin + j] += h;
        double cp = cost(probe);
        probe.p[blk.begin + j] -= 2.0 * h;
        double cm = cost(probe);
        grad[blk.begin + j] = (cp - cm) / (2.0 * h);
      }
      double gn = 0.0;
      for (int j = blk.begin; j < blk.end; ++j) gn += grad[j] * grad[j];
      gn = std::sqrt(gn);
      if (gn == 0.0) continue;

      double st = blk.step;
      bool accepted = false;
      Packed cand = pk;
      for (int half = 0; half <= 20; ++half) {
        for (int j = blk.begin; j < blk.end; ++j) {
          cand.p[j] = pk.p[j] - st * grad[j] / gn;
        }
        double cn = cost(cand);
        if (cn < c) {
          accepted = true;
          break;
        }
        st /= 2.0;
      }
      if (accepted) {
        renormalize(cand, ecost);
        double cn2 = cost(cand);
        if (cn2 < c) {
          pk = cand;
          c = cn2;
          blk.step = std::min(st * 2.0, 0.5);
          improved = true;
        } else {
          blk.step = std::max(st / 2.0, 1e-9);
        }
      } else {
        blk.step = std::max(blk.step / 2.0, 1e-9);
      }
    }
    trace.cost_per_iteration.push_back(c);
    if (!improved || (c_start - c) < cfg.rel_tol * std::max(std::abs(c_start), 1e-8)) {
      trace.terminated_by = "tolerance";
      break;
    }
  }
  trace.final_cost = c;
  return {pk.unpack(), trace};
}

Signal apply_inverse(const HammersteinInverse& inv, const Signal& e) {
  Signal x = apply_inverse_map_only(inv, e);
  return fir_convolve(x, inv.w);
}

Signal apply_inverse_map_only(const HammersteinInverse& inv, const Signal& e) {
  Signal out{std::vector<double>(e.samples.size()), e.sample_rate};
  inv.g.apply(e.samples, out.samples);
  return out;
}

// -------------------------------------------------------------- serialization

std::string inverse_to_json(const HammersteinInverse& inv) {
  nlohmann::json j;
  j["g"]["knots_x"] = inv.g.knots_x();
  j["g"]["knots_y"] = inv.g.ordinates();
  j["w"]["taps"] = inv.w.taps;
  j["w"]["reference_index"] = inv.w.reference_index;
  return j.dump(2);
}

HammersteinInverse inverse_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  HammersteinInverse inv;
  inv.g = MonotoneMap::from_ordinates(j.at("g").at("knots_x").get<std::vector<double>>(),
                                      j.at("g").at("knots_y").get<std::vector<double>>());
  inv.w.taps = j.at("w").at("taps").get<std::vector<double>>();
  inv.w.reference_index = j.at("w").at("reference_index").get<std::size_t>();
  validate(inv.w);
  return inv;
}

std::string trace_to_csv(const InversionTrace& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,cost\n";
  for (std::size_t i = 0; i < trace.cost_per_iteration.size(); ++i) {
    os << i << "," << trace.cost_per_iteration[i] << "\n";
  }
  return os.str();
}

}  // namespace blindinv
