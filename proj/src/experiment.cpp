#include "blindinv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "blindinv/channel.hpp"
#include "blindinv/rng.hpp"

namespace blindinv {

void ExperimentConfig::validate() const {
  if (n_speakers < 2) throw ConfigError("ExperimentConfig: n_speakers must be >= 2");
  if (!(train_seconds > 0.0) || !(test_seconds > 0.0)) {
    throw ConfigError("ExperimentConfig: durations must be positive");
  }
  if (n_test_sentences < 1) throw ConfigError("ExperimentConfig: n_test_sentences must be >= 1");
  if (!(k > 0.0)) throw ConfigError("ExperimentConfig: k must be positive");
  if (sample_rate <= 0) throw ConfigError("ExperimentConfig: sample_rate must be positive");
  for (const auto& subset : fusion_subsets) {
    if (subset.empty()) throw ConfigError("ExperimentConfig: empty fusion subset");
    for (int id : subset) {
      if (id < 1 || id > 4) throw ConfigError("ExperimentConfig: classifier ids are 1..4");
    }
  }
  inversion.validate();
}

namespace {

constexpr int kArOrder = 10;

// Fixed FIR colorations standing in for the two recording channels.
const FirFilter kMic1{{1.0, 0.35, -0.15}, 0};
const FirFilter kMic2{{0.7, -0.3, 0.2, -0.1}, 0};

std::vector<double> poles_to_ar(const std::vector<std::complex<double>>& poles) {
  std::vector<std::complex<double>> a{1.0};
  for (const auto& p : poles) {
    std::vector<std::complex<double>> next(a.size() + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      next[i] += a[i];
      next[i + 1] -= a[i] * p;
    }
    a = std::move(next);
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
  return out;
}

std::vector<double> draw_ar_coeffs(Rng& rng) {
  std::vector<std::complex<double>> poles;
  for (int i = 0; i < kArOrder / 2; ++i) {
    double r = rng.uniform(0.85, 0.98);
    double th = rng.uniform(0.05 * std::numbers::pi, 0.95 * std::numbers::pi);
    poles.emplace_back(r * std::cos(th), r * std::sin(th));
    poles.emplace_back(r * std::cos(th), -r * std::sin(th));
  }
  return poles_to_ar(poles);
}

std::vector<double> log_ar_spectrum(const std::vector<double>& a, int grid = 256) {
  std::vector<double> out(grid);
  for (int b = 0; b < grid; ++b) {
    double theta = std::numbers::pi * (b + 0.5) / grid;
    std::complex<double> den = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      den += a[t] * std::exp(std::complex<double>(0.0, -theta * double(t)));
    }
    out[b] = -std::log(std::max(std::abs(den), 1e-12));
  }
  return out;
}

double rms_log_spectral_distance(const std::vector<double>& s1, const std::vector<double>& s2) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s1.size(); ++i) acc += (s1[i] - s2[i]) * (s1[i] - s2[i]);
  return std::sqrt(acc / double(s1.size()));
}

Signal synth_ar_signal(const std::vector<double>& a, Rng& rng, std::size_t n, int sample_rate) {
  const std::size_t warmup = 1000;
  std::vector<double> y(n + warmup, 0.0);
  for (std::size_t t = 0; t < y.size(); ++t) {
    double acc = rng.laplace();
    for (int k = 1; k <= kArOrder && std::size_t(k) <= t; ++k) acc -= a[std::size_t(k)] * y[t - k];
    y[t] = acc;
  }
  Signal out;
  out.sample_rate = sample_rate;
  out.samples.assign(y.begin() + warmup, y.end());
  return normalize_peak(out);
}

}  // namespace

Corpus synth_corpus(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_train = std::size_t(cfg.train_seconds * cfg.sample_rate);
  const std::size_t n_test = std::size_t(cfg.test_seconds * cfg.sample_rate);

  // Draw AR models, regenerating any speaker spectrally too close to an
  // earlier one.
  std::vector<std::vector<double>> ar(cfg.n_speakers);
  std::vector<std::vector<double>> spectra(cfg.n_speakers);
  const double min_dist = 0.5;
  for (int spk = 0; spk < cfg.n_speakers; ++spk) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng(Rng::substream(cfg.seed, 1000 + std::uint64_t(spk) * 97 + attempt));
      auto coeffs = draw_ar_coeffs(rng);
      auto spec = log_ar_spectrum(coeffs);
      bool ok = true;
      for (int other = 0; other < spk; ++other) {
        if (rms_log_spectral_distance(spec, spectra[other]) < min_dist) {
          ok = false;
          break;
        }
      }
      if (ok) {
        ar[spk] = std::move(coeffs);
        spectra[spk] = std::move(spec);
        break;
      }
    }
  }

  Corpus corpus;
  for (int spk = 0; spk < cfg.n_speakers; ++spk) {
    char name[16];
    std::snprintf(name, sizeof(name), "spk%02d", spk);
    Rng train_rng(Rng::substream(cfg.seed, 2000 + std::uint64_t(spk)));
    Signal train = synth_ar_signal(ar[spk], train_rng, n_train, cfg.sample_rate);
    corpus.training[0].emplace(name, fir_convolve(train, kMic1));
    corpus.training[1].emplace(name, fir_convolve(train, kMic2));
    for (int sent = 0; sent < cfg.n_test_sentences; ++sent) {
      Rng test_rng(Rng::substream(cfg.seed, 3000 + std::uint64_t(spk) * 131 + std::uint64_t(sent)));
      Signal test = synth_ar_signal(ar[spk], test_rng, n_test, cfg.sample_rate);
      Corpus::Test t;
      t.speaker = name;
      t.sentence = sent;
      t.mic = {fir_convolve(test, kMic1), fir_convolve(test, kMic2)};
      corpus.tests.push_back(std::move(t));
    }
  }
  return corpus;
}

double ExperimentReport::best_single_rate() const {
  return std::max({comp_rate[0], sat_rate[0], comp_rate[1], sat_rate[1]});
}

double ExperimentReport::best_fused_rate() const {
  double best = 0.0;
  for (const auto& f : fusions) best = std::max({best, f.arithmetic_rate, f.geometric_rate});
  return best;
}

namespace {

struct SentenceOutcome {
  std::array<std::string, 2> clean, sat, comp;
  // distances per classifier id 1..4 (index 0..3)
  std::array<std::map<std::string, double>, 4> distances;
  std::array<ExperimentReport::TraceSummary, 2> trace;
  std::string error;
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Corpus corpus = synth_corpus(cfg);

  PipelineConfig pipe = cfg.pipeline;
  pipe.mfcc.sample_rate = cfg.sample_rate;
  std::array<SpeakerModelSet, 2> models{enroll(corpus.training[0], pipe),
                                        enroll(corpus.training[1], pipe)};

  const int n_sentences = int(corpus.tests.size());
  std::vector<SentenceOutcome> outcomes(n_sentences);
  MemorylessMap sat_map = MemorylessMap::tanh_saturation(cfg.k);

#pragma omp parallel for schedule(dynamic)
  for (int si = 0; si < n_sentences; ++si) {
    SentenceOutcome& oc = outcomes[si];
    try {
      for (int mic = 0; mic < 2; ++mic) {
        const Signal& raw = corpus.tests[std::size_t(si)].mic[std::size_t(mic)];
        auto clean_res = identify(raw, models[std::size_t(mic)], pipe);
        oc.clean[std::size_t(mic)] = clean_res.decision;

        Signal saturated = apply_nonlinearity(normalize_peak(raw), sat_map);
        auto sat_res = identify(saturated, models[std::size_t(mic)], pipe);
        oc.sat[std::size_t(mic)] = sat_res.decision;

        auto [inv, trace] = estimate_inverse(saturated, cfg.inversion);
        Signal comp = cfg.apply_filter ? apply_inverse(inv, saturated)
                                       : apply_inverse_map_only(inv, saturated);
        comp = normalize_peak(comp);
        auto comp_res = identify(comp, models[std::size_t(mic)], pipe);
        oc.comp[std::size_t(mic)] = comp_res.decision;

        oc.trace[std::size_t(mic)] = {int(trace.cost_per_iteration.size()) - 1,
                                      trace.cost_per_iteration.front(), trace.final_cost,
                                      trace.terminated_by};
        // Classifier numbering: odd = compensated, even = uncompensated.
        oc.distances[std::size_t(mic * 2)] = comp_res.distances;
        oc.distances[std::size_t(mic * 2 + 1)] = sat_res.distances;
      }
    } catch (const std::exception& err) {
      oc.error = err.what();
    }
  }

  ExperimentReport report;
  std::array<std::vector<std::string>, 2> clean_dec, sat_dec, comp_dec;
  std::vector<std::string> truth;
  for (int si = 0; si < n_sentences; ++si) {
    const auto& test = corpus.tests[std::size_t(si)];
    const auto& oc = outcomes[std::size_t(si)];
    truth.push_back(test.speaker);
    ExperimentReport::Entry entry;
    entry.truth = test.speaker;
    entry.sentence = test.sentence;
    entry.clean = oc.clean;
    entry.sat = oc.sat;
    entry.comp = oc.comp;
    entry.error = oc.error;
    report.decisions.push_back(entry);
    report.traces.push_back(oc.trace);
    for (int mic = 0; mic < 2; ++mic) {
      clean_dec[std::size_t(mic)].push_back(oc.clean[std::size_t(mic)]);
      sat_dec[std::size_t(mic)].push_back(oc.sat[std::size_t(mic)]);
      comp_dec[std::size_t(mic)].push_back(oc.comp[std::size_t(mic)]);
    }
  }
  for (int mic = 0; mic < 2; ++mic) {
    report.clean_rate[std::size_t(mic)] = identification_rate(clean_dec[std::size_t(mic)], truth);
    report.sat_rate[std::size_t(mic)] = identification_rate(sat_dec[std::size_t(mic)], truth);
    report.comp_rate[std::size_t(mic)] = identification_rate(comp_dec[std::size_t(mic)], truth);
  }

  // Fusion over the four opinion streams.
  long agree = 0, total_pairs = 0;
  for (const auto& subset : cfg.fusion_subsets) {
    std::vector<std::string> arith_dec, geo_dec;
    for (int si = 0; si < n_sentences; ++si) {
      const auto& oc = outcomes[std::size_t(si)];
      if (!oc.error.empty()) {
        arith_dec.push_back("<error>");
        geo_dec.push_back("<error>");
        continue;
      }
      std::vector<OpinionVector> opinions;
      for (int id : subset) {
        opinions.push_back(
            distances_to_opinions(oc.distances[std::size_t(id - 1)], cfg.opinion_temperature));
      }
      auto pick = [](const OpinionVector& ov) {
        std::string best_id;
        double best = -1.0;
        for (const auto& [id, s] : ov.scores) {
          if (s > best) {
            best = s;
            best_id = id;
          }
        }
        return best_id;
      };
      std::string da = pick(fuse(opinions, FusionRule::Arithmetic));
      std::string dg = pick(fuse(opinions, FusionRule::Geometric));
      arith_dec.push_back(da);
      geo_dec.push_back(dg);
      if (da == dg) ++agree;
      ++total_pairs;
    }
    ExperimentReport::FusionResult fr;
    fr.subset = subset;
    fr.arithmetic_rate = identification_rate(arith_dec, truth);
    fr.geometric_rate = identification_rate(geo_dec, truth);
    report.fusions.push_back(fr);
  }
  report.arith_geo_agreement = total_pairs > 0 ? double(agree) / double(total_pairs) : 1.0;
  return report;
}

// ---------------------------------------------------------------- rendering

namespace {

nlohmann::json report_to_json_obj(const ExperimentReport& r) {
  nlohmann::json j;
  j["clean_rate"] = r.clean_rate;
  j["sat_rate"] = r.sat_rate;
  j["comp_rate"] = r.comp_rate;
  j["arith_geo_agreement"] = r.arith_geo_agreement;
  for (const auto& f : r.fusions) {
    j["fusions"].push_back({{"subset", f.subset},
                            {"arithmetic_rate", f.arithmetic_rate},
                            {"geometric_rate", f.geometric_rate}});
  }
  j["fusions"] = j.value("fusions", nlohmann::json::array());
  for (const auto& e : r.decisions) {
    j["decisions"].push_back({{"truth", e.truth},
                              {"sentence", e.sentence},
                              {"clean", e.clean},
                              {"sat", e.sat},
                              {"comp", e.comp},
                              {"error", e.error}});
  }
  j["decisions"] = j.value("decisions", nlohmann::json::array());
  for (const auto& t : r.traces) {
    nlohmann::json pair = nlohmann::json::array();
    for (const auto& ts : t) {
      pair.push_back({{"iterations", ts.iterations},
                      {"initial_cost", ts.initial_cost},
                      {"final_cost", ts.final_cost},
                      {"terminated_by", ts.terminated_by}});
    }
    j["traces"].push_back(pair);
  }
  j["traces"] = j.value("traces", nlohmann::json::array());
  return j;
}

std::string format_rate(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", rate);
  return buf;
}

std::string subset_label(const std::vector<int>& subset) {
  std::string s;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i) s += "&";
    s += std::to_string(subset[i]);
  }
  return s;
}

}  // namespace

std::string report_render(const ExperimentReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json_obj(r).dump(2);
  if (format == ReportFormat::Csv) {
    std::ostringstream os;
    os << "row,rule,rate\n";
    os << "clean mic1,," << format_rate(r.clean_rate[0]) << "\n";
    os << "clean mic2,," << format_rate(r.clean_rate[1]) << "\n";
    os << "1 (mic1+NL compensation),," << format_rate(r.comp_rate[0]) << "\n";
    os << "2 (mic1),," << format_rate(r.sat_rate[0]) << "\n";
    os << "3 (mic2+NL compensation),," << format_rate(r.comp_rate[1]) << "\n";
    os << "4 (mic2),," << format_rate(r.sat_rate[1]) << "\n";
    for (const auto& f : r.fusions) {
      os << "fusion " << subset_label(f.subset) << ",arithmetic," << format_rate(f.arithmetic_rate)
         << "\n";
      os << "fusion " << subset_label(f.subset) << ",geometric," << format_rate(f.geometric_rate)
         << "\n";
    }
    return os.str();
  }

  std::ostringstream os;
  os << "Combination                         Recognition rate\n";
  os << "clean mic1                          " << format_rate(r.clean_rate[0]) << " %\n";
  os << "clean mic2                          " << format_rate(r.clean_rate[1]) << " %\n";
  os << "1 (mic1+NL compensation)            " << format_rate(r.comp_rate[0]) << " %\n";
  os << "2 (mic1)                            " << format_rate(r.sat_rate[0]) << " %\n";
  os << "3 (mic2+NL compensation)            " << format_rate(r.comp_rate[1]) << " %\n";
  os << "4 (mic2)                            " << format_rate(r.sat_rate[1]) << " %\n";
  for (const auto& f : r.fusions) {
    std::string label = "fusion " + subset_label(f.subset);
    label.resize(22, ' ');
    os << label << "Arithmetic mean   " << format_rate(f.arithmetic_rate) << " %\n";
    os << std::string(22, ' ') << "Geometric mean    " << format_rate(f.geometric_rate) << " %\n";
  }
  return os.str();
}

ExperimentReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentReport r;
  r.clean_rate = j.at("clean_rate").get<std::array<double, 2>>();
  r.sat_rate = j.at("sat_rate").get<std::array<double, 2>>();
  r.comp_rate = j.at("comp_rate").get<std::array<double, 2>>();
  r.arith_geo_agreement = j.at("arith_geo_agreement").get<double>();
  for (const auto& jf : j.at("fusions")) {
    ExperimentReport::FusionResult f;
    f.subset = jf.at("subset").get<std::vector<int>>();
    f.arithmetic_rate = jf.at("arithmetic_rate").get<double>();
    f.geometric_rate = jf.at("geometric_rate").get<double>();
    r.fusions.push_back(f);
  }
  for (const auto& je : j.at("decisions")) {
    ExperimentReport::Entry e;
    e.truth = je.at("truth").get<std::string>();
    e.sentence = je.at("sentence").get<int>();
    e.clean = je.at("clean").get<std::array<std::string, 2>>();
    e.sat = je.at("sat").get<std::array<std::string, 2>>();
    e.comp = je.at("comp").get<std::array<std::string, 2>>();
    e.error = je.at("error").get<std::string>();
    r.decisions.push_back(e);
  }
  for (const auto& jt : j.at("traces")) {
    std::array<ExperimentReport::TraceSummary, 2> pair;
    for (int i = 0; i < 2; ++i) {
      pair[std::size_t(i)] = {jt[i].at("iterations").get<int>(),
                              jt[i].at("initial_cost").get<double>(),
                              jt[i].at("final_cost").get<double>(),
                              jt[i].at("terminated_by").get<std::string>()};
    }
    r.traces.push_back(pair);
  }
  return r;
}

// ------------------------------------------------------------- config (de)ser

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["n_speakers"] = cfg.n_speakers;
  j["train_seconds"] = cfg.train_seconds;
  j["n_test_sentences"] = cfg.n_test_sentences;
  j["test_seconds"] = cfg.test_seconds;
  j["sample_rate"] = cfg.sample_rate;
  j["k"] = cfg.k;
  j["fusion_subsets"] = cfg.fusion_subsets;
  j["opinion_temperature"] = cfg.opinion_temperature;
  j["apply_filter"] = cfg.apply_filter;
  j["seed"] = cfg.seed;
  j["inversion"] = {{"n_knots", cfg.inversion.n_knots},
                    {"w_len", cfg.inversion.w_len},
                    {"spacing_m", cfg.inversion.spacing_m},
                    {"max_iters", cfg.inversion.max_iters},
                    {"rel_tol", cfg.inversion.rel_tol},
                    {"step_init", cfg.inversion.step_init},
                    {"fft_bins", cfg.inversion.fft_bins},
                    {"max_cost_samples", cfg.inversion.max_cost_samples},
                    {"fd_step", cfg.inversion.fd_step}};
  j["pipeline"] = {{"preemph_alpha", cfg.pipeline.preemph_alpha},
                   {"bandlimit", cfg.pipeline.bandlimit},
                   {"frame_ms", cfg.pipeline.frame_ms},
                   {"overlap_frac", cfg.pipeline.overlap_frac},
                   {"n_mel", cfg.pipeline.mfcc.n_mel},
                   {"n_coeff", cfg.pipeline.mfcc.n_coeff}};
  return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.n_speakers = j.value("n_speakers", cfg.n_speakers);
  cfg.train_seconds = j.value("train_seconds", cfg.train_seconds);
  cfg.n_test_sentences = j.value("n_test_sentences", cfg.n_test_sentences);
  cfg.test_seconds = j.value("test_seconds", cfg.test_seconds);
  cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
  cfg.k = j.value("k", cfg.k);
  cfg.fusion_subsets = j.value("fusion_subsets", cfg.fusion_subsets);
  cfg.opinion_temperature = j.value("opinion_temperature", cfg.opinion_temperature);
  cfg.apply_filter = j.value("apply_filter", cfg.apply_filter);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("inversion")) {
    const auto& ji = j["inversion"];
    cfg.inversion.n_knots = ji.value("n_knots", cfg.inversion.n_knots);
    cfg.inversion.w_len = ji.value("w_len", cfg.inversion.w_len);
    cfg.inversion.spacing_m = ji.value("spacing_m", cfg.inversion.spacing_m);
    cfg.inversion.max_iters = ji.value("max_iters", cfg.inversion.max_iters);
    cfg.inversion.rel_tol = ji.value("rel_tol", cfg.inversion.rel_tol);
    cfg.inversion.step_init = ji.value("step_init", cfg.inversion.step_init);
    cfg.inversion.fft_bins = ji.value("fft_bins", cfg.inversion.fft_bins);
    cfg.inversion.max_cost_samples = ji.value("max_cost_samples", cfg.inversion.max_cost_samples);
    cfg.inversion.fd_step = ji.value("fd_step", cfg.inversion.fd_step);
  }
  if (j.contains("pipeline")) {
    const auto& jp = j["pipeline"];
    cfg.pipeline.preemph_alpha = jp.value("preemph_alpha", cfg.pipeline.preemph_alpha);
    cfg.pipeline.bandlimit = jp.value("bandlimit", cfg.pipeline.bandlimit);
    cfg.pipeline.frame_ms = jp.value("frame_ms", cfg.pipeline.frame_ms);
    cfg.pipeline.overlap_frac = jp.value("overlap_frac", cfg.pipeline.overlap_frac);
    cfg.pipeline.mfcc.n_mel = jp.value("n_mel", cfg.pipeline.mfcc.n_mel);
    cfg.pipeline.mfcc.n_coeff = jp.value("n_coeff", cfg.pipeline.mfcc.n_coeff);
  }
  cfg.validate();
  return cfg;
}

}  // namespace blindinv
