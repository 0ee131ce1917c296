// Enrollment, closed-set identification, distance-to-opinion conversion and
// opinion fusion.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "blindinv/features.hpp"
#include "blindinv/signal.hpp"

namespace blindinv {

// Preprocessing applied before MFCC on both training and test material.
struct PipelineConfig {
  double preemph_alpha = 0.95;
  bool bandlimit = false;
  double frame_ms = 30.0;
  double overlap_frac = 2.0 / 3.0;
  MfccConfig mfcc;
};

struct SpeakerModelSet {
  std::map<std::string, CovarianceModel> models;
  int l = 0;
};

struct OpinionVector {
  std::map<std::string, double> scores;  // nonnegative, sum to 1
};

enum class FusionRule { Arithmetic, Geometric, Weighted };

std::vector<Eigen::VectorXd> extract_features(const Signal& x, const PipelineConfig& cfg);

SpeakerModelSet enroll(const std::map<std::string, Signal>& training, const PipelineConfig& cfg);

struct IdentificationResult {
  std::string decision;
  std::map<std::string, double> distances;
};

IdentificationResult identify(const Signal& test, const SpeakerModelSet& models,
                              const PipelineConfig& cfg);
IdentificationResult identify_model(const CovarianceModel& test_model,
                                    const SpeakerModelSet& models);

OpinionVector distances_to_opinions(const std::map<std::string, double>& distances,
                                    double temperature = 1.0);

OpinionVector fuse(const std::vector<OpinionVector>& opinions, FusionRule rule,
                   const std::vector<double>& weights = {});

double identification_rate(const std::vector<std::string>& decisions,
                           const std::vector<std::string>& truth);

std::string models_to_json(const SpeakerModelSet& set);
SpeakerModelSet models_from_json(const std::string& text);

}  // namespace blindinv
