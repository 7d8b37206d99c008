#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phrasecritic/critic.hpp"
#include "phrasecritic/worldsim.hpp"

namespace phrasecritic {

struct FoilExample {
  int scene_id = 0;
  std::vector<std::string> tokens;
  int label = 1;  // 1 relevant, 0 foil
  int gold_index = -1;
  std::string gold_correction;
};

// Ground-truth sentences that have foils plus the foils themselves, for the
// scenes of one split (balanced when every scene has its foils).
std::vector<FoilExample> foil_examples(const Dataset& dataset, Split split);

std::vector<LabeledExample> labeled_examples(const Dataset& dataset,
                                             std::span<const FoilExample> examples,
                                             const CriticModel& vocab_model);

TrainedCritic train_foil_classifier(const Dataset& dataset, const CriticHyper& hyper,
                                    std::uint64_t seed);

struct Classification {
  double probability = 0.0;
  bool relevant = false;
  bool fallback = false;  // no phrase: labeled foil
};

Classification classify(std::span<const std::string> tokens, const Scene& scene,
                        const Dataset& dataset, const CriticModel& model);

// Critic logit of a token list; a sentence without phrases scores 0, the
// decision boundary.
double sentence_logit(std::span<const std::string> tokens, const Scene& scene,
                      const Dataset& dataset, const CriticModel& model);

// Content words (adjectives and nouns) by position.
std::vector<int> content_positions(std::span<const std::string> tokens, const Taxonomy& taxonomy);

// Scorer used by detection and correction; lets the baseline share the protocol.
using SentenceScorer = std::function<double(std::span<const std::string>)>;

int detect_foil_word(std::span<const std::string> tokens, const Taxonomy& taxonomy,
                     const SentenceScorer& scorer);
int detect_foil_word(std::span<const std::string> tokens, const Scene& scene,
                     const Dataset& dataset, const CriticModel& model);

// Same-category tokens of the word at `index`, excluding the word itself.
std::vector<std::string> target_vocabulary(const std::string& word, const Taxonomy& taxonomy);

std::string correct_foil_word(std::span<const std::string> tokens, int index,
                              std::span<const std::string> targets, const SentenceScorer& scorer);
std::string correct_foil_word(std::span<const std::string> tokens, int index,
                              std::span<const std::string> targets, const Scene& scene,
                              const Dataset& dataset, const CriticModel& model);

bool baseline_classify(std::span<const std::string> tokens, const Scene& scene,
                       const Dataset& dataset, double tau);

// Sweeps midpoints of the sorted distinct mean scores; first best wins.
double tune_tau(std::span<const double> mean_scores, std::span<const int> labels);

struct FoilReport {
  int examples = 0;
  int foils = 0;
  double classification = 0.0;
  double detection = 0.0;
  double correction = 0.0;
  double baseline_classification = 0.0;
  double baseline_detection = 0.0;
  double baseline_correction = 0.0;
  double tau = 0.0;
  int fallbacks = 0;
};

FoilReport evaluate_foil(const Dataset& dataset, const CriticModel& model, Split split = Split::Test);

std::string format_foil_table(const FoilReport& report);

}  // namespace phrasecritic
