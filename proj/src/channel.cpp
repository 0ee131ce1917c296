#include "blindinv/channel.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace blindinv {

void validate(const FirFilter& h) {
  if (h.taps.empty()) throw ConfigError("FirFilter: empty taps");
  if (h.reference_index >= h.taps.size()) throw ConfigError("FirFilter: reference_index out of range");
  bool any = false;
  for (double t : h.taps) {
    if (!std::isfinite(t)) throw ConfigError("FirFilter: non-finite tap");
    if (t != 0.0) any = true;
  }
  if (!any) throw ConfigError("FirFilter: all taps zero");
}

MemorylessMap MemorylessMap::tanh_saturation(double k) {
  if (!(k > 0.0)) throw ConfigError("tanh_saturation: k must be positive");
  MemorylessMap m;
  m.kind = Kind::TanhSaturation;
  m.k = k;
  return m;
}

MemorylessMap MemorylessMap::table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ConfigError("table map: need >= 2 knots");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1]) || !(ys[i] > ys[i - 1])) {
      throw ConfigError("table map: knots must be strictly increasing");
    }
  }
  MemorylessMap m;
  m.kind = Kind::Table;
  m.knots_x = std::move(xs);
  m.knots_y = std::move(ys);
  return m;
}

double MemorylessMap::operator()(double v) const {
  switch (kind) {
    case Kind::Identity:
      return v;
    case Kind::TanhSaturation:
      return std::tanh(k * v);
    case Kind::Table: {
      // Piecewise linear between knots, linear extension outside.
      std::size_t n = knots_x.size();
      std::size_t seg;
      if (v <= knots_x.front()) {
        seg = 0;
      } else if (v >= knots_x.back()) {
        seg = n - 2;
      } else {
        seg = std::size_t(std::upper_bound(knots_x.begin(), knots_x.end(), v) - knots_x.begin()) - 1;
      }
      double slope = (knots_y[seg + 1] - knots_y[seg]) / (knots_x[seg + 1] - knots_x[seg]);
      return knots_y[seg] + slope * (v - knots_x[seg]);
    }
  }
  return v;
}

void fir_convolve_serial(const double* x, std::size_t n, const double* taps,
                         std::size_t ntaps, std::size_t ref, double* out) {
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ntaps; ++k) {
      std::ptrdiff_t idx = std::ptrdiff_t(t) - std::ptrdiff_t(k) + std::ptrdiff_t(ref);
      if (idx >= 0 && idx < std::ptrdiff_t(n)) acc += taps[k] * x[idx];
    }
    out[t] = acc;
  }
}

void fir_convolve_parallel(const double* x, std::size_t n, const double* taps,
                           std::size_t ntaps, std::size_t ref, double* out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < std::ptrdiff_t(n); ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ntaps; ++k) {
      std::ptrdiff_t idx = t - std::ptrdiff_t(k) + std::ptrdiff_t(ref);
      if (idx >= 0 && idx < std::ptrdiff_t(n)) acc += taps[k] * x[idx];
    }
    out[t] = acc;
  }
}

Signal fir_convolve(const Signal& s, const FirFilter& h) {
  if (s.samples.empty()) throw DegenerateInputError("fir_convolve: empty signal");
  validate(h);
  Signal out{std::vector<double>(s.samples.size()), s.sample_rate};
  fir_convolve_parallel(s.samples.data(), s.samples.size(), h.taps.data(), h.taps.size(),
                        h.reference_index, out.samples.data());
  return out;
}

Signal apply_nonlinearity(const Signal& x, const MemorylessMap& f) {
  Signal out{std::vector<double>(x.samples.size()), x.sample_rate};
  for (std::size_t i = 0; i < x.samples.size(); ++i) out.samples[i] = f(x.samples[i]);
  return out;
}

Signal wiener_forward(const Signal& s, const FirFilter& h, const MemorylessMap& f) {
  return apply_nonlinearity(fir_convolve(s, h), f);
}

std::vector<Signal> make_saturated_testset(const std::vector<Signal>& tests, double k) {
  MemorylessMap sat = MemorylessMap::tanh_saturation(k);
  std::vector<Signal> out;
  out.reserve(tests.size());
  for (const Signal& t : tests) out.push_back(apply_nonlinearity(normalize_peak(t), sat));
  return out;
}

std::string channel_to_json(const FirFilter& h, const MemorylessMap& f) {
  nlohmann::json j;
  j["taps"] = h.taps;
  j["reference_index"] = h.reference_index;
  switch (f.kind) {
    case MemorylessMap::Kind::Identity:
      j["nonlinearity"] = "identity";
      break;
    case MemorylessMap::Kind::TanhSaturation:
      j["nonlinearity"] = {{"tanh", f.k}};
      break;
    case MemorylessMap::Kind::Table:
      j["nonlinearity"] = {{"table", {{"knots_x", f.knots_x}, {"knots_y", f.knots_y}}}};
      break;
  }
  return j.dump(2);
}

std::pair<FirFilter, MemorylessMap> channel_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FirFilter h;
  h.taps = j.at("taps").get<std::vector<double>>();
  h.reference_index = j.at("reference_index").get<std::size_t>();
  validate(h);
  MemorylessMap f;
  const auto& jn = j.at("nonlinearity");
  if (jn.is_string() && jn.get<std::string>() == "identity") {
    f = MemorylessMap::identity();
  } else if (jn.contains("tanh")) {
    f = MemorylessMap::tanh_saturation(jn.at("tanh").get<double>());
  } else if (jn.contains("table")) {
    f = MemorylessMap::table(jn.at("table").at("knots_x").get<std::vector<double>>(),
                             jn.at("table").at("knots_y").get<std::vector<double>>());
  } else {
    throw ConfigError("channel_from_json: unknown nonlinearity");
  }
  return {h, f};
}

}  // namespace blindinv
