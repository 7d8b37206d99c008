#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phrasecritic/textproc.hpp"
#include "phrasecritic/worldsim.hpp"

namespace phrasecritic {

// Add-alpha bigram model over a closed vocabulary. Ids 0..2 are <s>, </s>,
// <unk>; the next-token distribution ranges over every id except <s>.
struct BigramLM {
  static constexpr int kStart = 0;
  static constexpr int kEnd = 1;
  static constexpr int kUnk = 2;

  std::vector<std::string> tokens;
  std::map<std::string, int, std::less<>> ids;
  double alpha = 0.1;
  std::vector<std::vector<double>> log_prob;  // [context][next]

  int id(std::string_view token) const;
  int size() const { return static_cast<int>(tokens.size()); }
  double conditional(int context, int next) const {
    return log_prob[static_cast<size_t>(context)][static_cast<size_t>(next)];
  }
};

BigramLM fit_language_model(std::span<const std::vector<std::string>> corpus,
                            std::span<const std::string> vocabulary, double alpha = 0.1);

// Sum of bigram log probabilities including the end marker.
double fluency(std::span<const std::string> tokens, const BigramLM& lm);

// One model per class, fit on the train-split ground-truth sentences of that
// class, so fluency rewards what is typically said about the class.
std::vector<BigramLM> fit_class_models(const Dataset& dataset, double alpha = 0.1);

struct Candidate {
  std::vector<std::string> tokens;
  double s_f = 0.0;
  std::vector<AttributePhrase> phrases;
  int class_id = 0;
};

struct SamplerConfig {
  int n = 100;
  double error_rate = 0.3;
  // Chance of appending a repeated mention ("... and a red head").
  double repeat_rate = 0.15;
};

std::vector<Candidate> sample_candidates(const Scene& scene, const ClassProfile& profile,
                                         const Taxonomy& taxonomy, const BigramLM& lm,
                                         const SamplerConfig& config, std::uint64_t seed);

}  // namespace phrasecritic
