#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "phrasecritic/explain.hpp"

namespace phrasecritic {

struct PartKeypointStats {
  int groundings = 0;
  int hits = 0;
  double distance_sum = 0.0;

  double accuracy() const { return groundings ? 100.0 * hits / groundings : 0.0; }
  double mean_distance() const { return groundings ? distance_sum / groundings : 0.0; }
};

struct KeypointReport {
  std::map<int, PartKeypointStats> parts;  // by part index
  int excluded = 0;                         // head noun without a keypoint

  void add(const KeypointReport& other);
};

// Closed-box test of the head-noun part's keypoint against the matched box,
// and the keypoint's distance to that box's center.
KeypointReport keypoint_metrics(std::span<const GroundedPhrase> grounded, const Scene& scene,
                                const Taxonomy& taxonomy);

struct CnpCs {
  int sentences = 0;
  int correct_sentences = 0;
  int phrases = 0;
  int correct_phrases = 0;

  double cnp() const { return phrases ? 100.0 * correct_phrases / phrases : 0.0; }
  double cs() const { return sentences ? 100.0 * correct_sentences / sentences : 0.0; }
};

// A sentence without phrases counts as incorrect.
void add_sentence(CnpCs& acc, std::span<const AttributePhrase> phrases, const Scene& scene,
                  const Taxonomy& taxonomy);

struct MethodResult {
  std::string name;
  CnpCs scores;
  int fallbacks = 0;
};

struct MetricReport {
  std::vector<MethodResult> methods;  // fluency-only, grounding-mean, phrase-critic
  MethodResult ungated_grounding;    // argmax mean s_i without the gate, for reference
  KeypointReport keypoints;          // groundings of the phrase-critic selections
  int scenes = 0;
  double threshold = kDefaultThreshold;
};

// Runs the selectors on identical candidate pools for every scene of the split.
MetricReport compare_methods(const Dataset& dataset, const CriticModel& model,
                             std::span<const BigramLM> class_models, const ExplainConfig& config,
                             Split split = Split::Test);

std::string format_selection_table(const MetricReport& report);
std::string format_keypoint_table(const MetricReport& report, const Taxonomy& taxonomy);

}  // namespace phrasecritic
