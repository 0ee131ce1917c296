#include "blindinv/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace blindinv {

std::vector<Eigen::VectorXd> extract_features(const Signal& x, const PipelineConfig& cfg) {
  Signal s = preemphasize(x, cfg.preemph_alpha);
  if (cfg.bandlimit) s = bandlimit_telephone(s);
  FrameSequence frames = frame_and_window(s, cfg.frame_ms, cfg.overlap_frac);
  MfccConfig mc = cfg.mfcc;
  mc.sample_rate = x.sample_rate;
  return mfcc(frames, mc);
}

SpeakerModelSet enroll(const std::map<std::string, Signal>& training, const PipelineConfig& cfg) {
  if (training.size() < 2) throw ConfigError("enroll: need at least 2 speakers");
  SpeakerModelSet set;
  set.l = cfg.mfcc.n_coeff;
  for (const auto& [id, sig] : training) {
    try {
      set.models.emplace(id, covariance_model(extract_features(sig, cfg)));
    } catch (const Error& err) {
      throw RankDeficiencyError("enroll: speaker '" + id + "': " + err.what());
    }
  }
  return set;
}

IdentificationResult identify_model(const CovarianceModel& test_model,
                                    const SpeakerModelSet& models) {
  if (models.models.empty()) throw ConfigError("identify: empty model set");
  IdentificationResult res;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [id, model] : models.models) {
    double d = sphericity_distance(test_model, model);
    res.distances[id] = d;
    if (d < best) {  // map iteration is ordered, so ties keep the smallest id
      best = d;
      res.decision = id;
    }
  }
  return res;
}

IdentificationResult identify(const Signal& test, const SpeakerModelSet& models,
                              const PipelineConfig& cfg) {
  return identify_model(covariance_model(extract_features(test, cfg)), models);
}

OpinionVector distances_to_opinions(const std::map<std::string, double>& distances,
                                    double temperature) {
  if (distances.empty()) throw ConfigError("distances_to_opinions: empty mapping");
  if (!(temperature > 0.0)) throw ConfigError("distances_to_opinions: temperature must be positive");
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& [_, d] : distances) dmin = std::min(dmin, d);
  OpinionVector ov;
  double total = 0.0;
  for (const auto& [id, d] : distances) {
    double s = std::exp(-(d - dmin) / temperature);
    ov.scores[id] = s;
    total += s;
  }
  for (auto& [_, s] : ov.scores) s /= total;
  return ov;
}

OpinionVector fuse(const std::vector<OpinionVector>& opinions, FusionRule rule,
                   const std::vector<double>& weights) {
  if (opinions.empty()) throw ConfigError("fuse: no opinions");
  const auto& keys = opinions.front().scores;
  for (const auto& ov : opinions) {
    if (ov.scores.size() != keys.size()) throw ConfigError("fuse: mismatched speaker sets");
    for (const auto& [id, _] : keys) {
      if (!ov.scores.count(id)) throw ConfigError("fuse: mismatched speaker sets");
    }
  }
  if (rule == FusionRule::Weighted) {
    if (weights.size() != opinions.size()) throw ConfigError("fuse: weights size mismatch");
    double wsum = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw ConfigError("fuse: negative weight");
      wsum += w;
    }
    if (!(wsum > 0.0)) throw ConfigError("fuse: weights sum to zero");
  }

  OpinionVector out;
  const double n = double(opinions.size());
  for (const auto& [id, _] : keys) {
    double acc = (rule == FusionRule::Geometric) ? 1.0 : 0.0;
    for (std::size_t i = 0; i < opinions.size(); ++i) {
      double s = opinions[i].scores.at(id);
      switch (rule) {
        case FusionRule::Arithmetic: acc += s / n; break;
        case FusionRule::Geometric: acc *= std::max(s, 1e-300); break;
        case FusionRule::Weighted: acc += weights[i] * s; break;
      }
    }
    if (rule == FusionRule::Geometric) acc = std::pow(acc, 1.0 / n);
    out.scores[id] = acc;
  }
  double total = 0.0;
  for (const auto& [_, s] : out.scores) total += s;
  for (auto& [_, s] : out.scores) s /= total;
  return out;
}

double identification_rate(const std::vector<std::string>& decisions,
                           const std::vector<std::string>& truth) {
  if (decisions.size() != truth.size()) throw ConfigError("identification_rate: length mismatch");
  if (decisions.empty()) throw ConfigError("identification_rate: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i] == truth[i]) ++correct;
  }
  return 100.0 * double(correct) / double(decisions.size());
}

std::string models_to_json(const SpeakerModelSet& set) {
  nlohmann::json j;
  j["l"] = set.l;
  for (const auto& [id, model] : set.models) {
    std::vector<double> flat(model.matrix.data(), model.matrix.data() + model.matrix.size());
    // Eigen stores column-major; emit row-major as documented.
    std::vector<double> rowmajor;
    rowmajor.reserve(flat.size());
    for (Eigen::Index r = 0; r < model.matrix.rows(); ++r) {
      for (Eigen::Index c = 0; c < model.matrix.cols(); ++c) rowmajor.push_back(model.matrix(r, c));
    }
    j["models"][id] = {{"matrix", rowmajor}, {"n_frames", model.n_frames}};
  }
  return j.dump(2);
}

SpeakerModelSet models_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SpeakerModelSet set;
  set.l = j.at("l").get<int>();
  for (const auto& [id, jm] : j.at("models").items()) {
    auto flat = jm.at("matrix").get<std::vector<double>>();
    CovarianceModel m;
    m.matrix.resize(set.l, set.l);
    for (int r = 0; r < set.l; ++r) {
      for (int c = 0; c < set.l; ++c) m.matrix(r, c) = flat[std::size_t(r) * set.l + c];
    }
    m.n_frames = jm.at("n_frames").get<std::size_t>();
    set.models.emplace(id, std::move(m));
  }
  return set;
}

}  // namespace blindinv
