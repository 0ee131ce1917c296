#include <doctest.h>

#include <cmath>
#include <numbers>

#include "blindinv/entropy.hpp"
#include "blindinv/inversion.hpp"
#include "blindinv/rng.hpp"

using namespace blindinv;

namespace {

// Independent oracle for the mean log magnitude response: dense trapezoid
// quadrature of log|W(theta)| over [0, 2*pi) at a resolution unrelated to
// fft_bins.
double log_gain_quadrature(const std::vector<double>& taps, int n_points) {
  double acc = 0.0;
  for (int b = 0; b < n_points; ++b) {
    double theta = 2.0 * std::numbers::pi * (double(b) + 0.5) / n_points;
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < taps.size(); ++t) {
      re += taps[t] * std::cos(theta * double(t));
      im -= taps[t] * std::sin(theta * double(t));
    }
    acc += std::log(std::max(1e-12, std::hypot(re, im)));
  }
  return acc / n_points;
}

Signal saturated_uniform(std::size_t n, double k, std::uint64_t seed) {
  Rng rng(seed);
  Signal e;
  e.sample_rate = 16000;
  e.samples.resize(n);
  for (double& v : e.samples) v = std::tanh(k * rng.uniform(-1.0, 1.0));
  return e;
}

}  // namespace

TEST_CASE("monotone map basics") {
  MonotoneMap g = MonotoneMap::from_ordinates({-1.0, 0.0, 1.0}, {-2.0, 0.0, 3.0});
  CHECK(g(-1.0) == doctest::Approx(-2.0));
  CHECK(g(0.0) == doctest::Approx(0.0));
  CHECK(g(1.0) == doctest::Approx(3.0));
  CHECK(g(0.5) == doctest::Approx(1.5));
  CHECK(g(2.0) == doctest::Approx(6.0));    // linear extension slope 3
  CHECK(g(-3.0) == doctest::Approx(-6.0));  // linear extension slope 2
  CHECK(g.derivative(-0.5) == doctest::Approx(2.0));
  CHECK(g.derivative(0.5) == doctest::Approx(3.0));
  auto ords = g.ordinates();
  CHECK(ords.size() == 3);
  CHECK(ords[2] == doctest::Approx(3.0));
}

TEST_CASE("monotone map is invertible for any parameters") {
  Rng rng(2);
  std::vector<double> li(10);
  for (double& v : li) v = rng.uniform(-6.0, 3.0);
  std::vector<double> kx(11);
  for (std::size_t i = 0; i < kx.size(); ++i) kx[i] = -1.0 + 0.2 * double(i);
  MonotoneMap g(kx, li, rng.uniform(-1, 1));
  double prev = g(-2.0);
  for (double v = -1.95; v <= 2.0; v += 0.05) {
    double cur = g(v);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("monotone map normalization is an exact reparameterization") {
  MonotoneMap g = MonotoneMap::from_ordinates({-1.0, 0.2, 1.0}, {0.5, 1.0, 4.0});
  MonotoneMap gn = g.normalized(1.5, 2.5);
  for (double v : {-1.5, -0.3, 0.0, 0.7, 1.9}) {
    CHECK(gn(v) == doctest::Approx((g(v) - 1.5) / 2.5).epsilon(1e-14));
  }
  CHECK_THROWS_AS(g.normalized(0.0, 0.0), ConfigError);
}

TEST_CASE("filter_log_gain exact values") {
  CHECK(filter_log_gain(FirFilter{{1.0}, 0}, 256) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(filter_log_gain(FirFilter{{2.5}, 0}, 256) == doctest::Approx(std::log(2.5)).epsilon(1e-14));
  // Minimum-phase {1, -0.5}: the mean log response over the circle is 0.
  CHECK(std::abs(filter_log_gain(FirFilter{{1.0, -0.5}, 0}, 1024)) < 1e-6);
}

TEST_CASE("filter_log_gain against quadrature oracle") {
  Rng rng(14);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> taps(9);
    for (double& v : taps) v = rng.uniform(-1, 1);
    taps[4] += 2.0;  // keep the response away from zeros on the circle
    FirFilter w{taps, 4};
    double ours = filter_log_gain(w, 2048);
    double oracle = log_gain_quadrature(taps, 40000);
    CHECK(std::abs(ours - oracle) < 1e-4);
  }
}

TEST_CASE("filter_log_gain reports floored bins for a zero on the circle") {
  // {1, -1} has W(0) = 0.
  int floored = 0;
  double v = filter_log_gain(FirFilter{{1.0, -1.0}, 0}, 256, &floored);
  CHECK(floored >= 1);
  CHECK(std::isfinite(v));
}

TEST_CASE("mean_log_derivative examples") {
  MonotoneMap g = MonotoneMap::from_ordinates({-1.0, 0.0, 1.0}, {-2.0, 0.0, 3.0});
  std::vector<double> e{-0.5, 0.5};
  CHECK(mean_log_derivative(g, e) ==
        doctest::Approx(0.5 * (std::log(2.0) + std::log(3.0))).epsilon(1e-14));
  CHECK_THROWS_AS(mean_log_derivative(g, {}), DegenerateInputError);
}

TEST_CASE("cost terms match their components") {
  Signal e = saturated_uniform(4000, 2.0, 3);
  InversionConfig cfg;
  HammersteinInverse inv = init_inverse(e, cfg);
  CostTerms terms = inversion_cost_terms(inv, e.samples, cfg);

  std::vector<double> x;
  inv.g.apply(e.samples, x);
  std::vector<double> y(x.size());
  fir_convolve_serial(x.data(), x.size(), inv.w.taps.data(), inv.w.taps.size(),
                      inv.w.reference_index, y.data());
  std::size_t m = std::size_t(std::ceil(std::pow(double(e.samples.size()), 2.0 / 3.0)));
  CHECK(std::abs(terms.entropy - marginal_entropy(y, m)) < 1e-12);
  CHECK(std::abs(terms.log_gain - filter_log_gain(inv.w, cfg.fft_bins)) < 1e-12);
  CHECK(std::abs(terms.mean_log_deriv - mean_log_derivative(inv.g, e.samples)) < 1e-12);
  CHECK(std::abs(terms.total() - (terms.entropy - terms.log_gain - terms.mean_log_deriv)) < 1e-15);
  CHECK(terms.total() == doctest::Approx(inversion_cost(inv, e, cfg)).epsilon(1e-14));
}

TEST_CASE("cost is exactly invariant to rescaling g") {
  // Scaling the output of g adds ln(c) to the entropy and ln(c) to the mean
  // log derivative, so the total is unchanged to machine precision.
  Signal e = saturated_uniform(3000, 2.0, 5);
  InversionConfig cfg;
  HammersteinInverse inv = init_inverse(e, cfg);
  double c0 = inversion_cost(inv, e, cfg);
  for (double c : {0.1, 5.0}) {
    HammersteinInverse scaled = inv;
    scaled.g = inv.g.normalized(0.0, 1.0 / c);  // multiplies g by c
    CHECK(std::abs(inversion_cost(scaled, e, cfg) - c0) < 1e-10);
  }
}

TEST_CASE("cost is invariant to rescaling w") {
  Signal e = saturated_uniform(3000, 2.0, 6);
  InversionConfig cfg;
  HammersteinInverse inv = init_inverse(e, cfg);
  inv.w.taps[inv.w.reference_index] = 1.0;
  inv.w.taps[2] = -0.4;
  double c0 = inversion_cost(inv, e, cfg);
  HammersteinInverse scaled = inv;
  for (double& t : scaled.w.taps) t *= 7.0;
  CHECK(std::abs(inversion_cost(scaled, e, cfg) - c0) < 1e-6);
}

TEST_CASE("init_inverse shape and guards") {
  Signal e = saturated_uniform(2000, 2.0, 7);
  InversionConfig cfg;
  HammersteinInverse inv = init_inverse(e, cfg);
  CHECK(int(inv.g.n_knots()) == cfg.n_knots);
  CHECK(int(inv.w.taps.size()) == cfg.w_len);
  CHECK(inv.w.reference_index == std::size_t(cfg.w_len / 2));
  CHECK(inv.w.taps[inv.w.reference_index] == doctest::Approx(1.0));
  CHECK(std::abs(filter_log_gain(inv.w, cfg.fft_bins)) < 1e-12);
  // Initial g is the identity on the knot range.
  for (double v : {-0.5, 0.0, 0.5}) CHECK(inv.g(v) == doctest::Approx(v).epsilon(1e-10));

  Signal flat{std::vector<double>(2000, 0.25), 16000};
  CHECK_THROWS_AS(init_inverse(flat, cfg), DegenerateInputError);
}

TEST_CASE("finite-difference gradient is consistent across probe sizes") {
  Signal e = saturated_uniform(2048, 2.0, 9);
  InversionConfig cfg;
  HammersteinInverse base = init_inverse(e, cfg);
  // Probe one knot increment with h and h/2; a smooth cost gives close slopes.
  auto cost_with_li = [&](double delta) {
    std::vector<double> li = base.g.log_increments();
    li[10] += delta;
    HammersteinInverse probe = base;
    probe.g = MonotoneMap(base.g.knots_x(), li, base.g.anchor());
    return inversion_cost(probe, e, cfg);
  };
  double h = 0.05;
  double g1 = (cost_with_li(h) - cost_with_li(-h)) / (2.0 * h);
  double g2 = (cost_with_li(h / 2) - cost_with_li(-h / 2)) / h;
  CHECK(std::abs(g1 - g2) < 0.05 * std::max(1.0, std::abs(g1)));
}

TEST_CASE("estimate_inverse trace is non-increasing and terminates") {
  Signal e = saturated_uniform(3000, 2.0, 1);
  InversionConfig cfg;
  cfg.max_iters = 20;
  cfg.w_len = 5;
  auto [inv, trace] = estimate_inverse(e, cfg);
  REQUIRE(!trace.cost_per_iteration.empty());
  for (std::size_t i = 1; i < trace.cost_per_iteration.size(); ++i) {
    CHECK(trace.cost_per_iteration[i] <= trace.cost_per_iteration[i - 1] + 1e-12);
  }
  CHECK(trace.final_cost == doctest::Approx(trace.cost_per_iteration.back()));
  CHECK((trace.terminated_by == "tolerance" || trace.terminated_by == "max_iters"));
  // All slopes of the returned map are positive by construction.
  auto ords = inv.g.ordinates();
  for (std::size_t i = 1; i < ords.size(); ++i) CHECK(ords[i] > ords[i - 1]);
}

TEST_CASE("no distortion leaves g near affine") {
  // Uniform input with no saturation: the initial identity map is already
  // optimal up to estimator noise, so the fit should stay close to affine.
  Rng rng(22);
  Signal e;
  e.sample_rate = 16000;
  e.samples.resize(4000);
  for (double& v : e.samples) v = rng.uniform(-1.0, 1.0);
  InversionConfig cfg;
  cfg.max_iters = 40;
  cfg.w_len = 5;
  auto [inv, trace] = estimate_inverse(e, cfg);
  CHECK(trace.cost_per_iteration.front() - trace.final_cost < 0.05);

  // Best affine fit of g over the data range.
  std::vector<double> xs, ys;
  for (double v = -0.95; v <= 0.95; v += 0.01) {
    xs.push_back(v);
    ys.push_back(inv.g(v));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  double resid = syy - sxy * sxy / sxx;
  CHECK(std::sqrt(std::max(0.0, resid) / double(xs.size())) < 0.05 * std::sqrt(syy / double(xs.size())));
}

TEST_CASE("estimate_inverse guards") {
  InversionConfig cfg;
  Signal tiny{std::vector<double>(100, 0.1), 16000};
  CHECK_THROWS_AS(estimate_inverse(tiny, cfg), DegenerateInputError);
  InversionConfig bad;
  bad.w_len = 4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  InversionConfig bad2;
  bad2.n_knots = 2;
  CHECK_THROWS_AS(bad2.validate(), ConfigError);
}

TEST_CASE("apply_inverse composes map then filter") {
  HammersteinInverse inv;
  inv.g = MonotoneMap::from_ordinates({-1.0, 1.0}, {-2.0, 2.0});  // g(v) = 2v
  inv.w = FirFilter{{0.0, 1.0, 0.0}, 1};
  Signal e{{0.1, -0.2, 0.3}, 16000};
  Signal y = apply_inverse(inv, e);
  Signal ym = apply_inverse_map_only(inv, e);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(ym.samples[i] == doctest::Approx(2.0 * e.samples[i]).epsilon(1e-14));
    CHECK(y.samples[i] == doctest::Approx(ym.samples[i]).epsilon(1e-14));
  }
}

TEST_CASE("inverse json round trip") {
  HammersteinInverse inv;
  inv.g = MonotoneMap::from_ordinates({-1.0, 0.0, 2.0}, {-0.9, 0.1, 1.7});
  inv.w = FirFilter{{0.2, 1.0, -0.3}, 1};
  HammersteinInverse back = inverse_from_json(inverse_to_json(inv));
  for (double v : {-1.5, -0.5, 0.0, 1.0, 2.5}) {
    CHECK(back.g(v) == doctest::Approx(inv.g(v)).epsilon(1e-12));
  }
  CHECK(back.w.taps == inv.w.taps);
  CHECK(back.w.reference_index == inv.w.reference_index);
}

TEST_CASE("trace csv format") {
  InversionTrace tr;
  tr.cost_per_iteration = {1.5, 1.25};
  tr.final_cost = 1.25;
  std::string csv = trace_to_csv(tr);
  CHECK(csv.substr(0, 15) == "iteration,cost\n");
  CHECK(csv.find("0,1.5") != std::string::npos);
  CHECK(csv.find("1,1.25") != std::string::npos);
}
