#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phrasecritic/critic.hpp"
#include "phrasecritic/generation.hpp"
#include "phrasecritic/grounding.hpp"
#include "phrasecritic/negatives.hpp"

namespace phrasecritic {

// Chunk a token list and ground each phrase in the scene with the dataset's
// grounder.
std::vector<GroundedPhrase> ground_sentence(std::span<const std::string> tokens,
                                            const Scene& scene, const Dataset& dataset);

std::vector<StepInput> sentence_steps(std::span<const std::string> tokens, const Scene& scene,
                                      const Dataset& dataset, const CriticModel& model);

// Oracle: the scene has a region of the phrase's part carrying every adjective.
bool phrase_true(const AttributePhrase& phrase, const Scene& scene, const Taxonomy& taxonomy);

// Mean raw grounding score; nullopt when the sentence has no phrase.
std::optional<double> mean_grounding_score(std::span<const std::string> tokens,
                                           const Scene& scene, const Dataset& dataset);

int region_feature_dim(const Taxonomy& taxonomy);

struct PairSets {
  std::vector<PairExample> train, val, test;
};

// Pairs whose positive or negative has no phrase are skipped.
PairSets pair_examples(const Dataset& dataset, std::span<const RankPair> pairs,
                       const CriticModel& vocab_model);

struct RankingRun {
  std::vector<RankPair> pairs;
  TrainedCritic critic;
};

TrainedCritic train_on_pairs(const Dataset& dataset, std::span<const RankPair> pairs,
                             const CriticHyper& hyper, std::uint64_t seed);

// build_rank_pairs followed by train_ranker on the train split, validated on val.
RankingRun train_ranking_critic(const Dataset& dataset, int k, const CriticHyper& hyper,
                                std::uint64_t seed);

// Held-out pairwise accuracy of the critic and of the raw mean-s ranker on the
// same pairs (pairs with a phrase-less side are skipped).
struct RankingAccuracy {
  int pairs = 0;
  double critic = 0.0;
  double mean_score = 0.0;
};
RankingAccuracy ranking_accuracy(const Dataset& dataset, std::span<const RankPair> pairs,
                                 const CriticModel& model, Split split = Split::Test);

}  // namespace phrasecritic
