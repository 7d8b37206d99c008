#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phrasecritic/critic.hpp"
#include "phrasecritic/generation.hpp"
#include "phrasecritic/grounding.hpp"

namespace phrasecritic {

inline constexpr double kDefaultThreshold = -5.0;

// Gate-then-argmax: among entries with s_f > threshold and a relevance score,
// the first maximum of s_r; when none qualifies, the first maximum of s_f
// with `fallback` set.
struct GatedChoice {
  int index = 0;
  bool fallback = false;
  int survivors = 0;
};
GatedChoice gated_argmax(std::span<const double> s_f, std::span<const std::optional<double>> s_r,
                         double threshold);

struct Explanation {
  int scene_id = 0;
  int index = 0;  // position in the candidate list
  Candidate candidate;
  double s_f = 0.0;
  std::optional<double> s_r;  // absent only for a phrase-less fallback
  double s = 0.0;             // s_r when s_f > T, else 0
  bool fallback = false;
  int survivors = 0;
  std::vector<GroundedPhrase> grounded;
  std::vector<double> phrase_scores;  // critic score of each phrase on its own
};

Explanation select_explanation(std::span<const Candidate> candidates, const Scene& scene,
                               const Dataset& dataset, const CriticModel& model,
                               double threshold = kDefaultThreshold);

// Nearest other class to the scene's true attributes, first index on ties.
int counterfactual_class(const Scene& query, std::span<const ClassProfile> profiles);

// Nearest scene of `class_id` by attribute distance, first index on ties.
int nearest_scene_of_class(const Scene& query, const Dataset& dataset, int class_id);

struct ExplainConfig {
  SamplerConfig sampler;
  double threshold = kDefaultThreshold;
  std::uint64_t seed = 0;
};

// Candidates for a scene, seeded per scene id so every command sees the same pool.
std::vector<Candidate> scene_candidates(const Scene& scene, const Dataset& dataset,
                                        std::span<const BigramLM> class_models,
                                        const ExplainConfig& config);

struct Counterfactual {
  int scene_id = 0;
  int class_id = 0;
  std::string class_name;
  int neighbor_scene = 0;
  std::vector<std::string> neighbor_sentence;
  std::vector<AttributePhrase> phrases;  // from the neighbor's explanation
  std::vector<double> scores;            // critic score of each phrase on the query
  int evidence = 0;                      // argmin of scores
  std::string evidence_text;
  std::string negation;
  std::string conditional;
};

Counterfactual counterfactual_evidence(const Scene& query, int class_id, const Dataset& dataset,
                                       const CriticModel& model,
                                       std::span<const BigramLM> class_models,
                                       const ExplainConfig& config);

Counterfactual explain_counterfactual(const Scene& query, const Dataset& dataset,
                                      const CriticModel& model,
                                      std::span<const BigramLM> class_models,
                                      const ExplainConfig& config);

struct NegatedPhrase {
  std::string negation;
  std::string conditional;
};

// "this bird does not have a black beak" and
// "if this bird had been a <class>, it would have had a black beak";
// no article before plural nouns.
NegatedPhrase negate_phrase(const AttributePhrase& phrase, const std::string& class_name,
                            const Taxonomy& taxonomy);

// Schematic scene with region outlines and the grounded phrase boxes.
std::string render_svg(const Scene& scene, const Taxonomy& taxonomy,
                       std::span<const GroundedPhrase> grounded, const std::string& caption);

}  // namespace phrasecritic
